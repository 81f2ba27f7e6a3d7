#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "fixtures.hpp"
#include "lmd/errors.hpp"
#include "lmd/io.hpp"
#include "lmd/random.hpp"

using namespace lmd;

TEST(HistoryJson, RoundTrip) {
  const auto histories = fixtures::synthetic_histories(2, 3, 6);
  for (const auto& [user, h] : histories) {
    const auto doc = io::to_json(h);
    EXPECT_EQ(doc.at("schema_version"), io::kSchemaVersion);
    const LoginHistory back = io::history_from_json(doc);
    EXPECT_EQ(back, h);
    EXPECT_EQ(io::dump(io::to_json(back)), io::dump(doc));
  }
}

TEST(HistoryJson, IsolatedVerticesSurvive) {
  LoginGraph g("u", 4);
  g.add_login("A", "B", 3);
  g.add_vertex("Z");
  const LoginHistory h("u", {g});
  EXPECT_EQ(io::history_from_json(io::to_json(h)), h);
}

TEST(HistoryJson, RejectsBadDocuments) {
  auto doc = io::to_json(fixtures::repeated_history(2, {{"A", "B"}}));
  auto wrong_version = doc;
  wrong_version["schema_version"] = 99;
  EXPECT_THROW(io::history_from_json(wrong_version), UnreadableInputError);
  auto bad_edge = doc;
  bad_edge["graphs"][0]["edges"][0] = {"A", "B"};
  EXPECT_THROW(io::history_from_json(bad_edge), UnreadableInputError);
  auto bad_weight = doc;
  bad_weight["graphs"][0]["edges"][0][2] = 0;
  EXPECT_THROW(io::history_from_json(bad_weight), UnreadableInputError);
  EXPECT_THROW(io::read_json("/nonexistent.json"), UnreadableInputError);
}

TEST(EnsembleJson, RoundTrip) {
  ModelSpec a, b;
  a.measures = {Measure::out_degree, Measure::eccentricity};
  b.measures = {Measure::clustering, Measure::ego_degree, Measure::degree};
  b.compression = CompressionKind::pca;
  b.roles = 2;
  b.alpha = 0.1;
  Ensemble e{"u", {a, b}, {{InjectionMode::novel_to_novel, 0, a}, {InjectionMode::novel_to_known, 3, b}}};
  EXPECT_EQ(io::ensemble_from_json(io::to_json(e)), e);
  auto doc = io::to_json(e);
  doc["members"] = nlohmann::json::array();
  EXPECT_THROW(io::ensemble_from_json(doc), UnreadableInputError);
}

TEST(ModelJson, FullPrecisionRoundTrip) {
  Rng rng(1);
  Eigen::MatrixXd x(12, 3);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 3; ++j) x(i, j) = rng.uniform01() / 3.0;
  const auto pre = preprocess(x, CompressionKind::nmf);
  NmfModel nmf = fit_nmf(pre.matrix, 2, 5);
  nmf.scaling = pre.scaling;
  const auto nmf_back = io::nmf_model_from_json(nlohmann::json::parse(io::dump(io::to_json(nmf, 0.05))));
  EXPECT_EQ(nmf_back.g, nmf.g);
  EXPECT_EQ(nmf_back.f, nmf.f);
  EXPECT_EQ(nmf_back.scaling, nmf.scaling);
  EXPECT_EQ(nmf_back.objective_history, nmf.objective_history);

  const PcaModel pca = fit_pca(x, 2);
  const auto pca_back = io::pca_model_from_json(nlohmann::json::parse(io::dump(io::to_json(pca, 0.05))));
  EXPECT_EQ(pca_back.components, pca.components);
  EXPECT_EQ(pca_back.mean, pca.mean);
  EXPECT_EQ(pca_back.eigenvalues, pca.eigenvalues);
  EXPECT_EQ(pca_back.discarded_eigenvalues, pca.discarded_eigenvalues);
}

TEST(ScoresCsv, HeaderAndRows) {
  ModelScore s;
  s.spec.measures = {Measure::out_degree_rescaled, Measure::eccentricity};
  s.mean_fpr = 0.25;
  s.mean_tpr = {1.0, 0.5};
  std::ostringstream out;
  const std::vector<ModelScore> scores{s};
  io::write_scores_csv(out, scores);
  EXPECT_EQ(out.str(),
            "label,measures,compression,roles,alpha,mean_fpr,fpr_stderr,fpr_iterations,fpr_skipped,mu_tpr,tpr_0,tpr_1\n"
            "\"nmf(1,12)\",1 12,nmf,1,0.050000000000000003,0.25,0,0,0,0.75,1,0.5\n");
}

TEST(Catalog, Json) {
  const auto doc = io::catalog_to_json(adversarial_catalog());
  ASSERT_EQ(doc.at("graphs").size(), 16u);
  EXPECT_EQ(doc.at("graphs")[0].at("edges"), nlohmann::json::parse("[[0,1]]"));
}
