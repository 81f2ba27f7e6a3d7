#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "lmd/errors.hpp"
#include "lmd/evaluation.hpp"
#include "oracles.hpp"

using namespace lmd;

namespace {

ModelSpec spec(std::vector<int> ms, CompressionKind kind = CompressionKind::nmf, double alpha = 0.05) {
  ModelSpec s;
  for (int m : ms) s.measures.push_back(measure_from_index(m));
  s.compression = kind;
  s.alpha = alpha;
  return s;
}

EvalConfig config(std::uint64_t seed, int iters = 10, InjectionMode mode = InjectionMode::novel_to_novel) {
  EvalConfig c;
  c.seed = seed;
  c.iters = iters;
  c.mode = mode;
  return c;
}

ModelScore score(std::vector<int> ms, double fpr, std::vector<double> tpr) {
  ModelScore s;
  s.spec = spec(std::move(ms));
  s.mean_fpr = fpr;
  s.mean_tpr = std::move(tpr);
  return s;
}

const LoginHistory& first_user() {
  static const auto histories = fixtures::synthetic_histories(3, 101);
  return histories.begin()->second;
}

}  // namespace

TEST(ModelGrid, Cardinality) {
  EXPECT_EQ(model_grid(CompressionKind::nmf, {2}).size(), 78u);
  EXPECT_EQ(model_grid(CompressionKind::nmf, {3}).size(), 286u);
  const auto both = model_grid(CompressionKind::pca, {2, 3});
  EXPECT_EQ(both.size(), 364u);
  std::set<std::vector<Measure>> distinct;
  for (const auto& s : both) {
    EXPECT_TRUE(std::is_sorted(s.measures.begin(), s.measures.end()));
    EXPECT_EQ(std::adjacent_find(s.measures.begin(), s.measures.end()), s.measures.end());
    EXPECT_EQ(s.compression, CompressionKind::pca);
    distinct.insert(s.measures);
  }
  EXPECT_EQ(distinct.size(), 364u);
  EXPECT_THROW(model_grid(CompressionKind::nmf, {4}), std::invalid_argument);
}

TEST(ModelSpec, LabelAndValidation) {
  EXPECT_EQ(spec({1, 12}).label(), "nmf(1,12)");
  EXPECT_THROW(spec({1}).validate(), std::invalid_argument);
  EXPECT_THROW(spec({3, 1}).validate(), std::invalid_argument);
  EXPECT_THROW(spec({1, 2}, CompressionKind::nmf, 1.0).validate(), std::invalid_argument);
}

TEST(Seeds, KeptCount) {
  EXPECT_EQ(kept_count(28, 0.8), 23u);
  EXPECT_EQ(kept_count(10, 0.8), 8u);
  EXPECT_EQ(kept_count(5, 0.8), 4u);
  EXPECT_EQ(kept_count(1, 0.1), 1u);
  EXPECT_NE(split_seed(1, "a", 0), split_seed(1, "a", 1));
  EXPECT_NE(fit_seed(1, "a", -1, 0), fit_seed(1, "a", 0, 0));
  EXPECT_NE(injection_seed(1, "a", InjectionMode::novel_to_novel, 0, 0),
            injection_seed(1, "a", InjectionMode::novel_to_known, 0, 0));
}

TEST(EstimateFpr, NoNovelSystemsIsAnError) {
  const auto h = fixtures::repeated_history(10, {{"A", "B"}, {"B", "C"}}, "carol");
  try {
    estimate_fpr(h, spec({0, 1}), config(1));
    FAIL() << "expected NoNovelSystemsError";
  } catch (const NoNovelSystemsError& e) {
    EXPECT_NE(std::string(e.what()).find("carol"), std::string::npos);
  }
  EXPECT_THROW(search_models(h, CompressionKind::nmf, {2}, config(1)), NoNovelSystemsError);
}

TEST(EstimateFpr, TiedErrorsGiveZero) {
  // Two novel systems per graph, all rows identical under (k_out, k_in).
  std::vector<LoginGraph> gs;
  for (int d = 0; d < 6; ++d) {
    LoginGraph g("u", d);
    g.add_login("n" + std::to_string(2 * d), "n" + std::to_string(2 * d + 1));
    g.add_login("n" + std::to_string(2 * d + 1), "n" + std::to_string(2 * d));
    gs.push_back(std::move(g));
  }
  const LoginHistory h("u", std::move(gs));
  const auto r = estimate_fpr(h, spec({0, 2}, CompressionKind::pca), config(3));
  EXPECT_EQ(r.mean, 0.0);
  EXPECT_EQ(r.contributing, 10);
}

TEST(EstimateTpr, ChainIntoTwoVertexHistoryPca) {
  const auto h = fixtures::repeated_history(10, {{"A", "B"}});
  const auto& chain = adversarial_catalog()[15];
  ASSERT_EQ(chain.node_count, 5);
  for (std::uint64_t seed : {1u, 2u, 3u})
    EXPECT_EQ(estimate_tpr(h, spec({9, 12}, CompressionKind::pca), 15, config(seed, 25)), 1.0);
}

TEST(EstimateTpr, ThresholdAboveAllErrorsGivesZero) {
  // With alpha * n < 1 the threshold is the largest error, so nothing is
  // strictly above it.
  const LoginHistory& h = first_user();
  const auto tiny = spec({0, 1}, CompressionKind::nmf, 1e-4);
  for (int type : {0, 15}) EXPECT_EQ(estimate_tpr(h, tiny, type, config(4)), 0.0);
  EXPECT_EQ(estimate_fpr(h, tiny, config(4)).mean, 0.0);
}

TEST(Protocols, MatchStraightLineOracle) {
  const auto histories = fixtures::synthetic_histories(3, 78);
  int compared = 0;
  for (const auto& [user, h] : histories) {
    for (auto mode : {InjectionMode::novel_to_novel, InjectionMode::novel_to_known}) {
      const EvalConfig cfg = config(5, 8, mode);
      if (!ProtocolContext(h, cfg).any_novel()) {
        EXPECT_EQ(oracle::reference_fpr(h, spec({0, 1}), cfg).contributing, 0);
        continue;
      }
      ++compared;
      for (const auto& s : {spec({0, 1}), spec({1, 4, 12}, CompressionKind::pca)}) {
        const auto ours = estimate_fpr(h, s, cfg);
        const auto ref = oracle::reference_fpr(h, s, cfg);
        EXPECT_EQ(ours.mean, ref.mean) << user;
        EXPECT_EQ(ours.contributing, ref.contributing) << user;
        for (int type : {0, 7, 15})
          EXPECT_EQ(estimate_tpr(h, s, type, cfg), oracle::reference_tpr(h, s, type, cfg)) << user << " " << type;
      }
    }
  }
  EXPECT_EQ(compared, 6);
}

TEST(SearchModels, ParallelMatchesSerialAndEstimates) {
  const LoginHistory& h = first_user();
  EvalConfig cfg = config(9, 4);
  cfg.workers = 3;
  const auto par = search_models(h, CompressionKind::nmf, {2}, cfg);
  const auto ser = search_models_serial(h, CompressionKind::nmf, {2}, cfg);
  ASSERT_EQ(par.size(), 78u);
  ASSERT_EQ(ser.size(), 78u);
  for (std::size_t i = 0; i < par.size(); ++i) {
    EXPECT_EQ(par[i].spec, ser[i].spec);
    EXPECT_EQ(par[i].mean_fpr, ser[i].mean_fpr);
    EXPECT_EQ(par[i].fpr_stderr, ser[i].fpr_stderr);
    EXPECT_EQ(par[i].mean_tpr, ser[i].mean_tpr);
    EXPECT_EQ(par[i].mean_tpr.size(), 16u);
  }
  const auto& probe = par[17];
  EXPECT_EQ(probe.mean_fpr, estimate_fpr(h, probe.spec, cfg).mean);
  EXPECT_EQ(probe.mean_tpr[5], estimate_tpr(h, probe.spec, 5, cfg));
}

TEST(BuildEnsemble, PoolOfOnePicksFprMinimizer) {
  std::vector<ModelScore> scores;
  for (const auto& s : model_grid(CompressionKind::nmf, {2})) {
    ModelScore m;
    m.spec = s;
    m.mean_fpr = 0.5;
    m.mean_tpr.assign(16, 0.9);
    scores.push_back(m);
  }
  scores[40].mean_fpr = 0.01;
  scores[40].mean_tpr.assign(16, 0.1);
  const auto e = build_ensemble(scores, "u", InjectionMode::novel_to_novel);
  ASSERT_EQ(e.members.size(), 1u);
  EXPECT_EQ(e.members[0], scores[40].spec);
  EXPECT_EQ(e.provenance.size(), 16u);
}

TEST(BuildEnsemble, PoolOfFourFor364) {
  std::vector<ModelScore> scores;
  const auto grid = model_grid(CompressionKind::nmf, {2, 3});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ModelScore m;
    m.spec = grid[i];
    m.mean_fpr = 0.1 + 0.001 * static_cast<double>(i);
    m.mean_tpr.assign(16, 0.0);
    scores.push_back(m);
  }
  scores[3].mean_tpr.assign(16, 0.5);  // fourth-lowest FPR: inside the pool
  scores[4].mean_tpr.assign(16, 0.9);  // fifth: outside
  const auto e = build_ensemble(scores, "u", InjectionMode::novel_to_novel);
  ASSERT_EQ(e.members.size(), 1u);
  EXPECT_EQ(e.members[0], scores[3].spec);
}

TEST(BuildEnsemble, TwoComplementaryModels) {
  std::vector<double> first(16, 0.0), second(16, 0.0);
  for (int t = 0; t < 16; ++t) (t < 8 ? first : second)[t] = 1.0;
  const std::vector<ModelScore> scores{score({1, 12}, 0.01, first), score({4, 6}, 0.01, second)};
  EnsembleOptions opts;
  opts.pool_fraction = 1.0;
  const auto e = build_ensemble(scores, "u", InjectionMode::novel_to_novel, opts);
  ASSERT_EQ(e.members.size(), 2u);
  EXPECT_EQ(e.members[0].label(), "nmf(1,12)");
  EXPECT_EQ(e.members[1].label(), "nmf(4,6)");
  EXPECT_EQ(e.provenance[0].member.label(), "nmf(1,12)");
  EXPECT_EQ(e.provenance[15].member.label(), "nmf(4,6)");
}

TEST(BuildEnsemble, TieBreaks) {
  // Equal TPR: lower FPR wins; equal FPR too: lexicographic order.
  EnsembleOptions all;
  all.pool_fraction = 1.0;
  const std::vector<ModelScore> a{score({2, 3}, 0.2, std::vector<double>(16, 0.7)),
                                  score({0, 5}, 0.1, std::vector<double>(16, 0.7)),
                                  score({0, 4}, 0.1, std::vector<double>(16, 0.7))};
  EXPECT_EQ(build_ensemble(a, "u", InjectionMode::novel_to_novel, all).members[0].label(), "nmf(0,4)");
  // FPR ties at the pool boundary are only admitted on request.
  const std::vector<ModelScore> b{score({0, 1}, 0.0, std::vector<double>(16, 0.2)),
                                  score({0, 2}, 0.0, std::vector<double>(16, 0.9))};
  EXPECT_EQ(build_ensemble(b, "u", InjectionMode::novel_to_novel).members[0].label(), "nmf(0,1)");
  EnsembleOptions ties;
  ties.include_fpr_ties = true;
  EXPECT_EQ(build_ensemble(b, "u", InjectionMode::novel_to_novel, ties).members[0].label(), "nmf(0,2)");
  EXPECT_THROW(build_ensemble(std::vector<ModelScore>{}, "u", InjectionMode::novel_to_novel), std::invalid_argument);
}

TEST(CompositeEnsemble, UnionOfMembers) {
  std::vector<double> hi(16, 1.0);
  const auto e1 = build_ensemble(std::vector<ModelScore>{score({0, 1}, 0, hi)}, "u", InjectionMode::novel_to_novel);
  const auto e2 = build_ensemble(std::vector<ModelScore>{score({0, 2}, 0, hi)}, "u", InjectionMode::novel_to_known);
  const std::vector<Ensemble> parts{e1, e2, e1};
  const auto c = composite_ensemble(parts);
  ASSERT_EQ(c.members.size(), 2u);
  EXPECT_EQ(c.provenance.size(), 48u);
  Ensemble other = e2;
  other.user = "v";
  const std::vector<Ensemble> mixed{e1, other};
  EXPECT_THROW(composite_ensemble(mixed), std::invalid_argument);
}

TEST(EvaluateEnsemble, SingleMemberEqualsItsScore) {
  const LoginHistory& h = first_user();
  const EvalConfig cfg = config(21, 6);
  const ProtocolContext ctx(h, cfg);
  const std::vector<ModelSpec> specs{spec({0, 9}), spec({5, 12})};
  const auto scores = score_models(ctx, specs, false);
  for (const auto& s : scores) {
    Ensemble e{h.user(), {s.spec}, {}};
    const auto r = evaluate_ensemble(ctx, e);
    EXPECT_EQ(r.mean_fpr, s.mean_fpr);
    EXPECT_EQ(r.fpr_stderr, s.fpr_stderr);
    EXPECT_EQ(r.mean_tpr, s.mean_tpr);
    EXPECT_DOUBLE_EQ(r.mu_tpr, s.mean_tpr_over_types());
  }
}

TEST(EvaluateEnsemble, OrMonotonicity) {
  for (const auto& [user, h] : fixtures::synthetic_histories(3, 55)) {
    const EvalConfig cfg = config(8, 6);
    const ProtocolContext ctx(h, cfg);
    const std::vector<ModelSpec> members{spec({0, 1}), spec({4, 6}), spec({2, 7, 12}, CompressionKind::pca)};
    const auto scores = score_models(ctx, members, true);
    const auto r = evaluate_ensemble(ctx, Ensemble{user, members, {}});
    for (const auto& s : scores) {
      EXPECT_GE(r.mean_fpr, s.mean_fpr);
      for (std::size_t t = 0; t < 16; ++t) EXPECT_GE(r.mean_tpr[t], s.mean_tpr[t]);
    }
  }
}

TEST(EvaluateEnsemble, RocSweepReusesErrors) {
  const LoginHistory& h = first_user();
  const EvalConfig cfg = config(2, 5);
  const Ensemble e{h.user(), {spec({0, 1}), spec({3, 8})}, {}};
  const std::vector<double> alphas{0.01, 0.05, 0.2};
  const auto r = evaluate_ensemble(h, e, cfg, alphas);
  ASSERT_EQ(r.roc.size(), 3u);
  EXPECT_EQ(r.roc[1].mean_fpr, r.mean_fpr);
  EXPECT_EQ(r.roc[1].mean_tpr, r.mean_tpr);
  EXPECT_LE(r.roc[0].mu_tpr, r.roc[2].mu_tpr);
  EXPECT_LE(r.roc[0].mean_fpr, r.roc[2].mean_fpr);
}

TEST(Detect, NoNovelSystemsNoFits) {
  const auto h = fixtures::repeated_history(6, {{"A", "B"}});
  const Ensemble e{"u", {spec({0, 1})}, {}};
  const auto r = detect(h, e, 3);
  EXPECT_TRUE(r.alerts.empty());
  EXPECT_EQ(r.fits_performed, 0);
  EXPECT_THROW(detect(h, e, 99), MissingGraphError);
}

TEST(Detect, InjectedPrototypeRaisesAlert) {
  const LoginHistory& base = first_user();
  std::vector<LoginGraph> graphs = base.graphs();
  FreshIdSource ids(base.all_systems(), "adv-");
  const auto inj = inject_novel_to_novel(graphs.back(), adversarial_catalog()[15], ids);
  graphs.back() = inj.graph;
  const LoginHistory h(base.user(), graphs);
  const DayIndex day = graphs.back().day();

  // Members that score this chain type in search.
  const auto scores = search_models(h, CompressionKind::nmf, {2}, config(4, 6));
  std::vector<ModelSpec> strong;
  for (const auto& s : scores)
    if (s.mean_tpr[15] == 1.0) strong.push_back(s.spec);
  ASSERT_FALSE(strong.empty());
  strong.resize(std::min<std::size_t>(strong.size(), 3));
  const Ensemble e{h.user(), strong, {}};

  DetectOptions opts;
  opts.seed = 4;
  const auto r = detect(h, e, day, opts);
  EXPECT_EQ(r.fits_performed, static_cast<int>(strong.size()));
  ASSERT_FALSE(r.alerts.empty());
  bool names_injected = false;
  for (const auto& a : r.alerts) {
    EXPECT_TRUE(r.novel.contains(a.system));
    EXPECT_GT(a.error, a.threshold);
    EXPECT_FALSE(a.fired_by.empty());
    EXPECT_EQ(a.member, a.fired_by.front());
    names_injected = names_injected || inj.injected.contains({day, a.system});
  }
  EXPECT_TRUE(names_injected);
  for (const auto& a : r.informational) EXPECT_FALSE(r.novel.contains(a.system));

  const auto again = detect(h, e, day, opts);
  ASSERT_EQ(again.alerts.size(), r.alerts.size());
  for (std::size_t i = 0; i < r.alerts.size(); ++i) {
    EXPECT_EQ(again.alerts[i].system, r.alerts[i].system);
    EXPECT_EQ(again.alerts[i].error, r.alerts[i].error);
  }
}
