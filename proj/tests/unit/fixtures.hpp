#pragma once

#include <map>
#include <string>

#include "lmd/login_graph.hpp"
#include "lmd/synth.hpp"

namespace fixtures {

// Histories of a small seeded synthetic corpus.
inline std::map<std::string, lmd::LoginHistory> synthetic_histories(int users, std::uint64_t seed,
                                                                   int days = 28) {
  lmd::SynthConfig cfg;
  cfg.user_count = users;
  cfg.days = days;
  cfg.seed = seed;
  return lmd::build_daily_graphs(lmd::generate_synthetic_corpus(cfg).events, {});
}

inline lmd::LoginHistory repeated_history(int days, std::vector<std::pair<std::string, std::string>> edges,
                                          const std::string& user = "u") {
  std::vector<lmd::LoginGraph> graphs;
  for (int d = 0; d < days; ++d) {
    lmd::LoginGraph g(user, d);
    for (const auto& [a, b] : edges) g.add_login(a, b);
    graphs.push_back(std::move(g));
  }
  return lmd::LoginHistory(user, std::move(graphs));
}

}  // namespace fixtures
