#include <gtest/gtest.h>

#include <map>

#include "lmd/login_graph.hpp"
#include "lmd/synth.hpp"

using namespace lmd;

TEST(Synth, DeterministicForSeed) {
  SynthConfig cfg;
  cfg.user_count = 5;
  cfg.seed = 17;
  const auto a = generate_synthetic_corpus(cfg);
  const auto b = generate_synthetic_corpus(cfg);
  EXPECT_EQ(a.events, b.events);
  EXPECT_EQ(a.archetypes, b.archetypes);
  cfg.seed = 18;
  EXPECT_NE(generate_synthetic_corpus(cfg).events, a.events);
}

TEST(Synth, ArchetypeQuota) {
  SynthConfig cfg;
  cfg.seed = 1;
  const auto c = generate_synthetic_corpus(cfg);
  std::map<Archetype, int> counts;
  for (const auto& [u, a] : c.archetypes) ++counts[a];
  EXPECT_EQ(counts[Archetype::star_admin], 8);
  EXPECT_EQ(counts[Archetype::chain_admin], 8);
  EXPECT_EQ(counts[Archetype::random_sprawl], 4);
}

TEST(Synth, EventsSortedValidAndFullDays) {
  SynthConfig cfg;
  cfg.user_count = 6;
  cfg.seed = 2;
  const auto c = generate_synthetic_corpus(cfg);
  for (std::size_t i = 1; i < c.events.size(); ++i) EXPECT_LE(c.events[i - 1].timestamp, c.events[i].timestamp);
  for (const auto& e : c.events) {
    EXPECT_NE(e.source, e.destination);
    EXPECT_EQ(e.event_code, 4624);
  }
  const auto histories = build_daily_graphs(c.events, {});
  EXPECT_EQ(histories.size(), 6u);
  for (const auto& [u, h] : histories) {
    EXPECT_EQ(h.size(), 28u);
    EXPECT_EQ(h.graphs().front().day(), cfg.start_day);
  }
}

TEST(Synth, NovelRateProducesNovelSystems) {
  SynthConfig cfg;
  cfg.user_count = 10;
  cfg.seed = 3;
  cfg.novel_rate = 0.0;
  for (const auto& [u, h] : build_daily_graphs(generate_synthetic_corpus(cfg).events, {}))
    for (const auto& s : h.all_systems()) EXPECT_EQ(s.find("-new-"), std::string::npos);
  cfg.novel_rate = 0.2;
  std::size_t novel = 0;
  for (const auto& [u, h] : build_daily_graphs(generate_synthetic_corpus(cfg).events, {}))
    for (const auto& g : h.graphs()) novel += novel_systems(h, g.day()).size();
  EXPECT_GT(novel, 100u);
}

TEST(Synth, ActivityRateSkipsDays) {
  SynthConfig cfg;
  cfg.user_count = 4;
  cfg.seed = 4;
  cfg.activity_rate = 0.5;
  for (const auto& [u, h] : build_daily_graphs(generate_synthetic_corpus(cfg).events, {})) EXPECT_LT(h.size(), 28u);
}

TEST(Synth, ValidatesConfig) {
  SynthConfig cfg;
  cfg.novel_rate = 1.5;
  EXPECT_THROW(generate_synthetic_corpus(cfg), std::invalid_argument);
  cfg = {};
  cfg.star.pool_max = 2;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.days = 4;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_EQ(parse_archetype("chain_admin"), Archetype::chain_admin);
}
