#include "lmd/login_graph.hpp"

#include <algorithm>
#include <stdexcept>

#include "lmd/errors.hpp"

namespace lmd {

void LoginGraph::add_vertex(const SystemId& system) {
  if (system.empty()) throw std::invalid_argument("system identifier must be non-empty");
  vertices_.insert(system);
}

void LoginGraph::add_login(const SystemId& source, const SystemId& destination,
                           std::int64_t count) {
  if (count < 1) throw std::invalid_argument("login count must be >= 1");
  add_vertex(source);
  add_vertex(destination);
  edges_[{source, destination}] += count;
}

std::int64_t LoginGraph::total_weight() const {
  std::int64_t total = 0;
  for (const auto& [edge, w] : edges_) total += w;
  return total;
}

LoginHistory::LoginHistory(std::string user, std::vector<LoginGraph> graphs)
    : user_(std::move(user)), graphs_(std::move(graphs)) {
  for (std::size_t i = 0; i < graphs_.size(); ++i) {
    if (graphs_[i].user() != user_)
      throw std::invalid_argument("graph user '" + graphs_[i].user() +
                                  "' does not match history user '" + user_ + "'");
    if (i > 0 && graphs_[i].day() <= graphs_[i - 1].day())
      throw std::invalid_argument("history days must be strictly increasing");
  }
}

const LoginGraph* LoginHistory::find(DayIndex day) const {
  auto it = std::lower_bound(graphs_.begin(), graphs_.end(), day,
                             [](const LoginGraph& g, DayIndex d) { return g.day() < d; });
  if (it == graphs_.end() || it->day() != day) return nullptr;
  return &*it;
}

const LoginGraph& LoginHistory::at(DayIndex day) const {
  const LoginGraph* g = find(day);
  if (!g)
    throw MissingGraphError("user '" + user_ + "' has no login graph for day " +
                            std::to_string(day));
  return *g;
}

std::set<SystemId> LoginHistory::all_systems() const {
  std::set<SystemId> out;
  for (const auto& g : graphs_) out.insert(g.vertices().begin(), g.vertices().end());
  return out;
}

std::map<std::string, LoginHistory> build_daily_graphs(std::span<const AuthEvent> events,
                                                       const IngestConfig& config) {
  config.validate();
  std::map<std::string, std::map<DayIndex, LoginGraph>> by_user;
  for (const auto& ev : events) {
    if (config.drop_self_loops && ev.source == ev.destination) continue;
    const DayIndex day = day_of(ev.timestamp, config);
    auto& days = by_user[ev.user];
    auto it = days.find(day);
    if (it == days.end()) it = days.emplace(day, LoginGraph(ev.user, day)).first;
    it->second.add_login(ev.source, ev.destination);
  }

  std::map<std::string, LoginHistory> out;
  for (auto& [user, days] : by_user) {
    std::vector<LoginGraph> graphs;
    graphs.reserve(days.size());
    for (auto& [day, g] : days) graphs.push_back(std::move(g));
    out.emplace(user, LoginHistory(user, std::move(graphs)));
  }
  return out;
}

std::set<SystemId> novel_systems(const LoginHistory& history, DayIndex test_day) {
  const LoginGraph& test = history.at(test_day);
  std::set<SystemId> seen_elsewhere;
  for (const auto& g : history.graphs()) {
    if (g.day() == test_day) continue;
    seen_elsewhere.insert(g.vertices().begin(), g.vertices().end());
  }
  std::set<SystemId> novel;
  for (const auto& v : test.vertices())
    if (!seen_elsewhere.contains(v)) novel.insert(v);
  return novel;
}

std::set<VertexKey> novel_in_subset(std::span<const LoginGraph> subset) {
  std::map<SystemId, std::pair<std::size_t, DayIndex>> appearances;
  for (const auto& g : subset) {
    for (const auto& v : g.vertices()) {
      auto& [count, day] = appearances[v];
      ++count;
      day = g.day();
    }
  }
  std::set<VertexKey> novel;
  for (const auto& [system, entry] : appearances)
    if (entry.first == 1) novel.insert(VertexKey{entry.second, system});
  return novel;
}

HistoryVerdict validate_history(const LoginHistory& history, std::size_t min_days) {
  if (history.size() < min_days)
    return {false, "insufficient login activity: " + std::to_string(history.size()) +
                       " active day(s), need at least " + std::to_string(min_days)};
  return {true, "ok"};
}

}  // namespace lmd
