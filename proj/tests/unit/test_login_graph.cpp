#include <gtest/gtest.h>

#include "lmd/errors.hpp"
#include "lmd/login_graph.hpp"

using namespace lmd;

namespace {

AuthEvent ev(const std::string& user, std::int64_t t, const std::string& s, const std::string& d) {
  AuthEvent e;
  e.timestamp = t;
  e.user = user;
  e.source = s;
  e.destination = d;
  return e;
}

LoginGraph graph(DayIndex day, std::vector<std::pair<std::string, std::string>> edges,
                 const std::string& user = "u") {
  LoginGraph g(user, day);
  for (auto& [a, b] : edges) g.add_login(a, b);
  return g;
}

}  // namespace

TEST(BuildDailyGraphs, RepeatedLoginsBecomeWeight) {
  const std::vector<AuthEvent> events{ev("u", 10, "A", "B"), ev("u", 20, "A", "B")};
  const auto h = build_daily_graphs(events, {});
  ASSERT_EQ(h.size(), 1u);
  const auto& g = h.at("u").graphs().at(0);
  EXPECT_EQ(g.edges().at({"A", "B"}), 2);
  EXPECT_EQ(g.vertices(), (std::set<SystemId>{"A", "B"}));
}

TEST(BuildDailyGraphs, GapDaysAbsent) {
  const std::vector<AuthEvent> events{ev("u", 5 * 86400 + 1, "A", "B"), ev("u", 3 * 86400, "A", "C")};
  const auto& h = build_daily_graphs(events, {}).at("u");
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h.graphs()[0].day(), 3);
  EXPECT_EQ(h.graphs()[1].day(), 5);
}

TEST(BuildDailyGraphs, WeightConservedAcrossUsers) {
  const std::vector<AuthEvent> events{ev("a", 1, "A", "B"), ev("a", 2, "A", "B"), ev("a", 86400, "B", "C"),
                                      ev("b", 3, "X", "Y"), ev("b", 4, "Y", "X"), ev("b", 5, "X", "Z"),
                                      ev("b", 2 * 86400, "X", "Y")};
  const auto h = build_daily_graphs(events, {});
  ASSERT_EQ(h.size(), 2u);
  std::int64_t total = 0;
  for (const auto& [user, hist] : h)
    for (const auto& g : hist.graphs()) total += g.total_weight();
  EXPECT_EQ(total, 7);
  EXPECT_EQ(h.at("a").size(), 2u);
  EXPECT_EQ(h.at("b").size(), 2u);
}

TEST(BuildDailyGraphs, SelfLoopsDroppedByDefault) {
  const std::vector<AuthEvent> events{ev("u", 1, "A", "A"), ev("u", 1, "A", "B")};
  const auto& g = build_daily_graphs(events, {}).at("u").graphs()[0];
  EXPECT_EQ(g.edge_count(), 1u);
  IngestConfig keep;
  keep.drop_self_loops = false;
  EXPECT_EQ(build_daily_graphs(events, keep).at("u").graphs()[0].edge_count(), 2u);
}

TEST(LoginGraph, InvariantsAndErrors) {
  LoginGraph g("u", 1);
  EXPECT_THROW(g.add_login("A", "B", 0), std::invalid_argument);
  g.add_login("A", "B", 3);
  g.add_vertex("C");
  EXPECT_TRUE(g.contains("C"));
  EXPECT_EQ(g.vertex_count(), 3u);
  EXPECT_EQ(g.total_weight(), 3);
}

TEST(LoginHistory, RejectsBadOrder) {
  EXPECT_THROW(LoginHistory("u", {graph(2, {{"A", "B"}}), graph(1, {{"A", "B"}})}), std::invalid_argument);
  EXPECT_THROW(LoginHistory("u", {graph(1, {{"A", "B"}}), graph(1, {{"A", "C"}})}), std::invalid_argument);
  EXPECT_THROW(LoginHistory("u", {graph(1, {{"A", "B"}}, "v")}), std::invalid_argument);
}

TEST(NovelSystems, Examples) {
  const LoginHistory h("u", {graph(1, {{"A", "Y"}}), graph(2, {{"A", "B"}}), graph(3, {{"A", "X"}, {"A", "Y"}})});
  EXPECT_EQ(novel_systems(h, 3), (std::set<SystemId>{"X"}));
  EXPECT_EQ(novel_systems(h, 2), (std::set<SystemId>{"B"}));
  EXPECT_THROW(novel_systems(h, 4), MissingGraphError);
  for (const auto& g : h.graphs())
    for (const auto& s : novel_systems(h, g.day())) EXPECT_TRUE(g.contains(s));
}

TEST(NovelInSubset, Examples) {
  std::vector<LoginGraph> five;
  for (int d = 0; d < 5; ++d) five.push_back(graph(d, {{"A", "B"}}));
  EXPECT_TRUE(novel_in_subset(five).empty());
  five[2].add_login("A", "ONCE");
  five[1].add_login("A", "TWICE");
  five[4].add_login("A", "TWICE");
  EXPECT_EQ(novel_in_subset(five), (std::set<VertexKey>{{2, "ONCE"}}));

  const std::vector<LoginGraph> single{graph(7, {{"A", "B"}, {"B", "C"}})};
  EXPECT_EQ(novel_in_subset(single), (std::set<VertexKey>{{7, "A"}, {7, "B"}, {7, "C"}}));
}

TEST(ValidateHistory, MinimumDays) {
  auto make = [](int days) {
    std::vector<LoginGraph> gs;
    for (int d = 0; d < days; ++d) gs.push_back(graph(d, {{"A", "B"}}));
    return LoginHistory("u", std::move(gs));
  };
  EXPECT_FALSE(validate_history(make(4)).ok);
  EXPECT_FALSE(validate_history(make(4)).reason.empty());
  EXPECT_TRUE(validate_history(make(5)).ok);
  EXPECT_TRUE(validate_history(make(19)).ok);
}
