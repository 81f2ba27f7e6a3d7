#include "lmd/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>

#include "lmd/errors.hpp"
#include "lmd/random.hpp"

namespace lmd {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

std::string numbered(std::string_view prefix, int i, int width = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*s%0*d", static_cast<int>(prefix.size()), prefix.data(),
                width, i);
  return buf;
}

void validate_shape(const ArchetypeShape& s, std::string_view name) {
  auto fail = [&](const char* what) {
    throw std::invalid_argument(std::string(name) + ": " + what);
  };
  if (s.pool_min < 1 || s.pool_max < s.pool_min) fail("pool range invalid");
  if (s.fanout_min < 1 || s.fanout_max < s.fanout_min) fail("fan-out range invalid");
  if (s.weight_min < 1 || s.weight_max < s.weight_min) fail("weight range invalid");
}

struct Login {
  SystemId source, destination;
  int weight;
};

class UserSimulator {
 public:
  UserSimulator(std::string user, Archetype archetype, const ArchetypeShape& shape,
                double novel_rate, std::uint64_t seed)
      : user_(std::move(user)), archetype_(archetype), shape_(shape), novel_rate_(novel_rate),
        rng_(seed) {
    const int pool = static_cast<int>(rng_.uniform_int(shape_.pool_min, shape_.pool_max));
    // Known systems drawn from a shared enterprise namespace.
    std::vector<int> ids(600);
    std::iota(ids.begin(), ids.end(), 0);
    rng_.shuffle(std::span<int>(ids));
    for (int i = 0; i < pool; ++i) pool_.push_back(numbered("srv-", ids[static_cast<std::size_t>(i)]));
    std::sort(pool_.begin(), pool_.end());
    workstation_ = user_ + "-ws";
    if (archetype_ == Archetype::chain_admin) {
      // The first two pool members act as jump hosts.
      jump_hosts_.assign(pool_.begin(), pool_.begin() + std::min<std::size_t>(2, pool_.size()));
      targets_.assign(pool_.begin() + static_cast<std::ptrdiff_t>(jump_hosts_.size()), pool_.end());
      if (targets_.empty()) targets_ = jump_hosts_;
    } else {
      targets_ = pool_;
    }
  }

  std::vector<Login> day() {
    switch (archetype_) {
      case Archetype::star_admin: return star_day();
      case Archetype::chain_admin: return chain_day();
      case Archetype::random_sprawl: return sprawl_day();
    }
    return {};
  }

  Rng& rng() { return rng_; }

 private:
  int weight() { return static_cast<int>(rng_.uniform_int(shape_.weight_min, shape_.weight_max)); }

  std::vector<SystemId> sample(const std::vector<SystemId>& from, int count) {
    std::vector<SystemId> copy = from;
    rng_.shuffle(std::span<SystemId>(copy));
    copy.resize(std::min<std::size_t>(copy.size(), static_cast<std::size_t>(count)));
    return copy;
  }

  SystemId maybe_novel(const SystemId& known) {
    if (novel_rate_ > 0.0 && rng_.bernoulli(novel_rate_))
      return numbered(user_ + "-new-", novel_counter_++, 4);
    return known;
  }

  int fanout() { return static_cast<int>(rng_.uniform_int(shape_.fanout_min, shape_.fanout_max)); }

  std::vector<Login> star_day() {
    std::vector<Login> out;
    for (const auto& dst : sample(targets_, fanout()))
      out.push_back({workstation_, maybe_novel(dst), weight()});
    return out;
  }

  std::vector<Login> chain_day() {
    std::vector<Login> out;
    const int jumps_today = jump_hosts_.size() > 1 && rng_.bernoulli(0.5) ? 2 : 1;
    const auto jumps = sample(jump_hosts_, jumps_today);
    for (const auto& j : jumps) out.push_back({workstation_, j, weight()});
    const auto servers = sample(targets_, fanout());
    for (std::size_t i = 0; i < servers.size(); ++i) {
      const SystemId dst = maybe_novel(servers[i]);
      out.push_back({jumps[i % jumps.size()], dst, weight()});
      // Occasional third hop to a backend.
      if (rng_.bernoulli(0.25)) {
        const SystemId backend = maybe_novel(targets_[rng_.uniform_index(targets_.size())]);
        if (backend != dst) out.push_back({dst, backend, weight()});
      }
    }
    return out;
  }

  std::vector<Login> sprawl_day() {
    std::vector<Login> out;
    std::vector<SystemId> nodes = pool_;
    nodes.push_back(workstation_);
    const int edges = fanout();
    for (int e = 0; e < edges; ++e) {
      const SystemId& a = nodes[rng_.uniform_index(nodes.size())];
      const SystemId b = maybe_novel(nodes[rng_.uniform_index(nodes.size())]);
      if (a == b) continue;
      out.push_back({a, b, weight()});
    }
    return out;
  }

  std::string user_;
  Archetype archetype_;
  ArchetypeShape shape_;
  double novel_rate_;
  Rng rng_;
  std::vector<SystemId> pool_, targets_, jump_hosts_;
  SystemId workstation_;
  int novel_counter_ = 0;
};

}  // namespace

std::string_view to_string(Archetype a) {
  switch (a) {
    case Archetype::star_admin: return "star_admin";
    case Archetype::chain_admin: return "chain_admin";
    case Archetype::random_sprawl: return "random_sprawl";
  }
  return "random_sprawl";
}

Archetype parse_archetype(std::string_view text) {
  if (text == "star_admin") return Archetype::star_admin;
  if (text == "chain_admin") return Archetype::chain_admin;
  if (text == "random_sprawl") return Archetype::random_sprawl;
  throw ConfigError("unknown archetype '" + std::string(text) + "'");
}

void SynthConfig::validate() const {
  if (user_count < 1) throw std::invalid_argument("user_count must be >= 1");
  if (days < 5) throw std::invalid_argument("days must be >= 5");
  for (double p : {star_share, chain_share, sprawl_share, novel_rate, activity_rate})
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probabilities must lie in [0, 1]");
  if (star_share + chain_share + sprawl_share <= 0.0)
    throw std::invalid_argument("archetype mix must have positive mass");
  validate_shape(star, "star");
  validate_shape(chain, "chain");
  validate_shape(sprawl, "sprawl");
}

SyntheticCorpus generate_synthetic_corpus(const SynthConfig& config) {
  config.validate();
  const SeedPath root = SeedPath(config.seed).with("synth");

  // Archetypes by quota over the normalised mix, then shuffled across users.
  const double total = config.star_share + config.chain_share + config.sprawl_share;
  std::vector<Archetype> kinds;
  for (int i = 0; i < config.user_count; ++i) {
    const double pos = (i + 0.5) / config.user_count * total;
    if (pos < config.star_share) kinds.push_back(Archetype::star_admin);
    else if (pos < config.star_share + config.chain_share) kinds.push_back(Archetype::chain_admin);
    else kinds.push_back(Archetype::random_sprawl);
  }
  Rng assign(root.with("archetypes").seed());
  assign.shuffle(std::span<Archetype>(kinds));

  SyntheticCorpus corpus;
  for (int u = 0; u < config.user_count; ++u) {
    const std::string user = numbered("user", u, 2);
    const Archetype kind = kinds[static_cast<std::size_t>(u)];
    corpus.archetypes.emplace(user, kind);
    const ArchetypeShape& shape = kind == Archetype::star_admin    ? config.star
                                  : kind == Archetype::chain_admin ? config.chain
                                                                   : config.sprawl;
    UserSimulator sim(user, kind, shape, config.novel_rate, root.with(user).seed());
    for (int d = 0; d < config.days; ++d) {
      if (config.activity_rate < 1.0 && !sim.rng().bernoulli(config.activity_rate)) continue;
      const std::int64_t day_start = (config.start_day + d) * kSecondsPerDay;
      for (const auto& login : sim.day()) {
        for (int w = 0; w < login.weight; ++w) {
          AuthEvent ev;
          // Working hours, 08:00-18:00 UTC.
          ev.timestamp = day_start + 8 * 3600 + sim.rng().uniform_int(0, 10 * 3600 - 1);
          ev.user = user;
          ev.source = login.source;
          ev.destination = login.destination;
          ev.event_code = 4624;
          ev.logon_type = sim.rng().bernoulli(0.8) ? LogonType::network : LogonType::interactive;
          corpus.events.push_back(std::move(ev));
        }
      }
    }
  }
  std::stable_sort(corpus.events.begin(), corpus.events.end(), [](const AuthEvent& a, const AuthEvent& b) {
    return std::tie(a.timestamp, a.user, a.source, a.destination) <
           std::tie(b.timestamp, b.user, b.source, b.destination);
  });
  return corpus;
}

}  // namespace lmd
