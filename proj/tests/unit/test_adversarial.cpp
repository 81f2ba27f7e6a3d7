#include <gtest/gtest.h>

#include <map>

#include "lmd/adversarial.hpp"
#include "oracles.hpp"

using namespace lmd;

namespace {

LoginGraph host() {
  LoginGraph g("u", 3);
  g.add_login("ws", "srv-1", 4);
  g.add_login("ws", "srv-2", 1);
  g.add_login("srv-1", "srv-3", 2);
  return g;
}

}  // namespace

TEST(Adversarial, SixteenGraphsBySize) {
  const auto& cat = adversarial_catalog();
  ASSERT_EQ(cat.size(), 16u);
  std::map<int, int> per_size;
  for (std::size_t i = 0; i < cat.size(); ++i) {
    EXPECT_EQ(cat[i].type_index, static_cast<int>(i));
    EXPECT_TRUE(satisfies_lateral_rules(cat[i]));
    ++per_size[cat[i].node_count];
  }
  EXPECT_EQ(per_size, (std::map<int, int>{{2, 1}, {3, 2}, {4, 4}, {5, 9}}));
}

TEST(Adversarial, MatchesExhaustiveOracle) {
  for (int n = 2; n <= 5; ++n) {
    std::set<std::string> ours;
    for (const auto& g : adversarial_catalog())
      if (g.node_count == n) ours.insert(oracle::canonical_form(n, g.edges));
    EXPECT_EQ(ours, oracle::lateral_classes(n)) << "n = " << n;
  }
}

TEST(Adversarial, FansComeFirstPerSize) {
  const auto& cat = adversarial_catalog();
  for (int type : {0, 1, 3, 7}) {
    for (auto [parent, child] : cat[type].edges) EXPECT_EQ(parent, cat[type].root);
  }
  // The 5-node chain is the last type.
  EXPECT_EQ(cat[15].edges, (std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}, {3, 4}}));
}

TEST(Adversarial, RulesRejectViolations) {
  AdversarialGraph g = adversarial_catalog()[1];
  EXPECT_TRUE(satisfies_lateral_rules(g));
  g.edges.emplace_back(1, 0);
  EXPECT_FALSE(satisfies_lateral_rules(g));
  AdversarialGraph two_parents{0, 3, {{0, 2}, {1, 2}}, 0, ""};
  EXPECT_FALSE(satisfies_lateral_rules(two_parents));
}

TEST(Adversarial, DeterministicEnumeration) {
  EXPECT_EQ(enumerate_adversarial(), adversarial_catalog());
}

TEST(FreshIds, AvoidTakenAndRepeat) {
  FreshIdSource ids({"adv-0", "adv-2"});
  std::set<SystemId> got;
  for (int i = 0; i < 5; ++i) got.insert(ids.next());
  EXPECT_EQ(got.size(), 5u);
  EXPECT_FALSE(got.contains("adv-0"));
  EXPECT_FALSE(got.contains("adv-2"));
}

TEST(Injection, NovelToNovelAddsDisjointComponent) {
  const LoginGraph parent = host();
  for (const auto& adv : adversarial_catalog()) {
    FreshIdSource ids(parent.vertices());
    const auto inj = inject_novel_to_novel(parent, adv, ids);
    EXPECT_EQ(inj.graph.vertex_count(), parent.vertex_count() + static_cast<std::size_t>(adv.node_count));
    EXPECT_EQ(inj.graph.edge_count(), parent.edge_count() + adv.edges.size());
    EXPECT_EQ(inj.injected.size(), static_cast<std::size_t>(adv.node_count));
    for (const auto& [e, w] : parent.edges()) EXPECT_EQ(inj.graph.edges().at(e), w);
    for (const auto& [e, w] : inj.graph.edges()) {
      const bool a = inj.injected.contains({parent.day(), e.first});
      const bool b = inj.injected.contains({parent.day(), e.second});
      EXPECT_EQ(a, b) << "edge crosses the component boundary";
      if (a) {
        EXPECT_EQ(w, 1);
      }
    }
  }
}

TEST(Injection, NovelToKnownSharesOneVertex) {
  const LoginGraph parent = host();
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    for (const auto& adv : adversarial_catalog()) {
      FreshIdSource ids(parent.vertices());
      const auto inj = inject_novel_to_known(parent, adv, rng, ids);
      std::size_t known = 0;
      for (const auto& key : inj.injected) known += parent.contains(key.system);
      EXPECT_EQ(known, 1u);
      EXPECT_EQ(inj.injected.size(), static_cast<std::size_t>(adv.node_count));
      EXPECT_EQ(inj.graph.vertex_count(), parent.vertex_count() + static_cast<std::size_t>(adv.node_count) - 1);
      EXPECT_EQ(inj.graph.total_weight(), parent.total_weight() + static_cast<std::int64_t>(adv.edges.size()));
    }
  }
  LoginGraph empty("u", 1);
  FreshIdSource ids({});
  EXPECT_THROW(inject_novel_to_known(empty, adversarial_catalog()[0], rng, ids), std::invalid_argument);
}

TEST(Injection, NovelToNovelRejectsCollision) {
  const LoginGraph parent = host();
  FreshIdSource ids({}, "srv-");  // would mint srv-1 eventually
  bool threw = false;
  try {
    for (int i = 0; i < 4; ++i) inject_novel_to_novel(parent, adversarial_catalog()[0], ids);
  } catch (const std::invalid_argument&) {
    threw = true;
  }
  EXPECT_TRUE(threw);
}
