#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lmd/ingest.hpp"

namespace lmd {

// A vertex of a user's history: the same system on two days is two vertices.
struct VertexKey {
  DayIndex day = 0;
  SystemId system;

  auto operator<=>(const VertexKey&) const = default;
  bool operator==(const VertexKey&) const = default;
};

using EdgeKey = std::pair<SystemId, SystemId>;

// One user's weighted directed login graph for one day. Edge weights count
// logins; every edge endpoint is a vertex.
class LoginGraph {
 public:
  LoginGraph() = default;
  LoginGraph(std::string user, DayIndex day) : user_(std::move(user)), day_(day) {}

  void add_vertex(const SystemId& system);
  // Adds `count` logins on (source, destination); count must be >= 1.
  void add_login(const SystemId& source, const SystemId& destination, std::int64_t count = 1);

  const std::string& user() const { return user_; }
  DayIndex day() const { return day_; }
  const std::set<SystemId>& vertices() const { return vertices_; }
  const std::map<EdgeKey, std::int64_t>& edges() const { return edges_; }

  bool contains(const SystemId& system) const { return vertices_.contains(system); }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::int64_t total_weight() const;

  bool operator==(const LoginGraph&) const = default;

 private:
  std::string user_;
  DayIndex day_ = 0;
  std::set<SystemId> vertices_;
  std::map<EdgeKey, std::int64_t> edges_;
};

// A user's daily graphs, strictly increasing by day.
class LoginHistory {
 public:
  LoginHistory() = default;
  // Throws std::invalid_argument when users differ or days are not strictly
  // increasing.
  LoginHistory(std::string user, std::vector<LoginGraph> graphs);

  const std::string& user() const { return user_; }
  const std::vector<LoginGraph>& graphs() const { return graphs_; }
  std::size_t size() const { return graphs_.size(); }

  const LoginGraph* find(DayIndex day) const;
  // Throws MissingGraphError.
  const LoginGraph& at(DayIndex day) const;

  std::set<SystemId> all_systems() const;

  bool operator==(const LoginHistory&) const = default;

 private:
  std::string user_;
  std::vector<LoginGraph> graphs_;
};

std::map<std::string, LoginHistory> build_daily_graphs(std::span<const AuthEvent> events,
                                                       const IngestConfig& config);

// Systems on `test_day` that appear in no other graph of the history.
std::set<SystemId> novel_systems(const LoginHistory& history, DayIndex test_day);

// Vertices whose system occurs in exactly one graph of the subset.
std::set<VertexKey> novel_in_subset(std::span<const LoginGraph> subset);

struct HistoryVerdict {
  bool ok = false;
  std::string reason;
};

HistoryVerdict validate_history(const LoginHistory& history, std::size_t min_days = 5);

}  // namespace lmd
