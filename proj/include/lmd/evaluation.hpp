#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lmd/adversarial.hpp"
#include "lmd/compression.hpp"
#include "lmd/login_graph.hpp"
#include "lmd/measures.hpp"

namespace lmd {

enum class InjectionMode { novel_to_novel, novel_to_known };

std::string_view to_string(InjectionMode mode);
InjectionMode parse_injection_mode(std::string_view text);

// A measure subset, compression kind, role count and significance level.
struct ModelSpec {
  std::vector<Measure> measures;
  CompressionKind compression = CompressionKind::nmf;
  int roles = 1;
  double alpha = 0.05;

  // Throws std::invalid_argument: 2 or 3 distinct ascending measures,
  // roles >= 1, alpha in (0, 1).
  void validate() const;
  // e.g. "nmf(1,12)"
  std::string label() const;

  auto operator<=>(const ModelSpec&) const = default;
  bool operator==(const ModelSpec&) const = default;
};

struct EvalConfig {
  int iters = 25;
  double split = 0.8;
  std::uint64_t seed = 0;
  InjectionMode mode = InjectionMode::novel_to_novel;
  // OpenMP threads for grid evaluation; <= 0 uses the OpenMP default.
  int workers = 0;
  PreprocessOptions preprocess;
  NmfOptions nmf;
  MeasureOptions measures;

  void validate() const;
};

struct FprEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  int contributing = 0;  // iterations with at least one novel system
  int skipped = 0;
};

struct ModelScore {
  ModelSpec spec;
  double mean_fpr = 0.0;
  double fpr_stderr = 0.0;
  int fpr_iterations = 0;
  int fpr_skipped = 0;
  std::vector<double> mean_tpr;  // indexed by adversarial type

  double mean_tpr_over_types() const;
};

struct EnsemblePick {
  InjectionMode mode = InjectionMode::novel_to_novel;
  int type_index = 0;
  ModelSpec member;

  bool operator==(const EnsemblePick&) const = default;
};

// Logical-OR combination of models. `members` is the sorted, de-duplicated
// range of `provenance`.
struct Ensemble {
  std::string user;
  std::vector<ModelSpec> members;
  std::vector<EnsemblePick> provenance;

  bool operator==(const Ensemble&) const = default;
};

// ---------------------------------------------------------------------------
// Seed derivation. Every stochastic step of the protocols draws from one of
// these, keyed by (master seed, user, step, indices), so matched iterations
// see identical splits and injections regardless of the model under test.

std::uint64_t split_seed(std::uint64_t master, const std::string& user, int iteration);
std::uint64_t injection_seed(std::uint64_t master, const std::string& user, InjectionMode mode,
                             int type_index, int iteration);
// type_index < 0 denotes the false-positive sample.
std::uint64_t fit_seed(std::uint64_t master, const std::string& user, int type_index,
                       int iteration);

// Size of the kept subset: ceil(split * m), at least 1.
std::size_t kept_count(std::size_t graphs, double split);

// Prefix for identifiers of injected prototype vertices.
inline constexpr std::string_view kInjectedIdPrefix = "adv-";

// One fitted sample: the stacked measure tables of the kept graphs plus a mask
// of the rows the protocol cares about (novel systems, or injected vertices).
struct ProtocolSample {
  std::vector<const MeasureTable*> tables;  // ascending day
  std::vector<char> target;                 // one flag per stacked row
  std::size_t target_count = 0;
  std::uint64_t fit_seed = 0;

  std::size_t rows() const { return target.size(); }
};

// Precomputed state for running the FPR/TPR protocols of one user many
// times: measure tables of every history graph, the per-iteration splits,
// and (lazily, per adversarial type) the injected graphs and their tables.
// Thread-safe for concurrent reads after construction.
class ProtocolContext {
 public:
  ProtocolContext(const LoginHistory& history, const EvalConfig& config);
  ProtocolContext(const ProtocolContext&) = delete;
  ProtocolContext& operator=(const ProtocolContext&) = delete;

  const LoginHistory& history() const { return *history_; }
  const EvalConfig& config() const { return config_; }
  int iterations() const { return config_.iters; }
  std::size_t type_count() const { return adversarial_catalog().size(); }

  // Kept graph indices for iteration j, in shuffled order.
  const std::vector<std::size_t>& kept(int iteration) const {
    return kept_[static_cast<std::size_t>(iteration)];
  }

  const ProtocolSample& fpr_sample(int iteration) const {
    return fpr_samples_[static_cast<std::size_t>(iteration)];
  }
  const ProtocolSample& tpr_sample(int type_index, int iteration) const;

  bool any_novel() const;

  // Computes the injected samples for every type up front (parallel).
  void prepare_all_trials() const;

 private:
  struct Trial {
    MeasureTable injected_table;
    ProtocolSample sample;
  };

  void prepare_type(int type_index) const;
  Trial make_trial(int type_index, int iteration) const;

  const LoginHistory* history_;
  EvalConfig config_;
  std::set<SystemId> all_systems_;
  std::vector<MeasureTable> tables_;
  std::vector<std::vector<std::size_t>> kept_;
  std::vector<ProtocolSample> fpr_samples_;
  mutable std::unique_ptr<std::once_flag[]> type_once_;
  mutable std::vector<std::vector<Trial>> trials_;
};

// Reconstruction errors of the sample's rows under `spec`.
Eigen::VectorXd sample_errors(const ProtocolSample& sample, const ModelSpec& spec,
                              const EvalConfig& config);
// Rows flagged as outliers (error strictly above the (1 - alpha) threshold).
std::vector<char> flag_rows(const Eigen::VectorXd& errors, double alpha);

FprEstimate estimate_fpr(const ProtocolContext& context, const ModelSpec& spec);
double estimate_tpr(const ProtocolContext& context, const ModelSpec& spec, int type_index);

// Convenience forms that build a context. estimate_fpr throws
// NoNovelSystemsError when every iteration lacks novel systems.
FprEstimate estimate_fpr(const LoginHistory& history, const ModelSpec& spec,
                         const EvalConfig& config);
double estimate_tpr(const LoginHistory& history, const ModelSpec& spec, int type_index,
                    const EvalConfig& config);

// Every measure subset of each size in `dims`, ascending lexicographic.
std::vector<ModelSpec> model_grid(CompressionKind compression, const std::set<int>& dims,
                                  int roles = 1, double alpha = 0.05);

// Scores every grid model: FPR plus TPR for each adversarial type. Work items
// are (model, slot) pairs evaluated with OpenMP; results do not depend on the
// worker count. Throws NoNovelSystemsError (message names the user).
std::vector<ModelScore> search_models(const LoginHistory& history, CompressionKind compression,
                                      const std::set<int>& dims, const EvalConfig& config,
                                      int roles = 1, double alpha = 0.05);
// Single-threaded reference with identical output.
std::vector<ModelScore> search_models_serial(const LoginHistory& history,
                                             CompressionKind compression,
                                             const std::set<int>& dims, const EvalConfig& config,
                                             int roles = 1, double alpha = 0.05);
std::vector<ModelScore> score_models(const ProtocolContext& context,
                                     std::span<const ModelSpec> specs, bool parallel);

struct EnsembleOptions {
  double pool_fraction = 0.01;
  // Also keep models whose FPR equals that of the last model inside the pool.
  bool include_fpr_ties = false;
};

// Per adversarial type: rank by FPR (ties by spec order), keep the first
// max(1, ceil(pool_fraction * count)) models, pick the highest TPR for the
// type (ties: lower FPR, then spec order).
Ensemble build_ensemble(std::span<const ModelScore> scores, const std::string& user,
                        InjectionMode mode, const EnsembleOptions& options = {});

// Union of members and provenance of several ensembles of the same user.
Ensemble composite_ensemble(std::span<const Ensemble> parts);

struct RocPoint {
  double alpha = 0.0;
  double mean_fpr = 0.0;
  double mu_tpr = 0.0;
  std::vector<double> mean_tpr;
};

struct EnsembleReport {
  std::string user;
  InjectionMode mode = InjectionMode::novel_to_novel;
  double mean_fpr = 0.0;
  double fpr_stderr = 0.0;
  int fpr_iterations = 0;
  int fpr_skipped = 0;
  std::vector<double> mean_tpr;
  double mu_tpr = 0.0;
  std::vector<RocPoint> roc;  // alpha sweep with all members at the given alpha
};

// Reruns both protocols with detection = OR over members. `roc_alphas`
// optionally adds a post-hoc alpha sweep over the same fitted errors.
EnsembleReport evaluate_ensemble(const ProtocolContext& context, const Ensemble& ensemble,
                                 std::span<const double> roc_alphas = {});
EnsembleReport evaluate_ensemble(const LoginHistory& history, const Ensemble& ensemble,
                                 const EvalConfig& config,
                                 std::span<const double> roc_alphas = {});

struct Alert {
  SystemId system;
  ModelSpec member;  // first member (in ensemble order) that fired
  double error = 0.0;
  double threshold = 0.0;
  std::vector<ModelSpec> fired_by;
};

struct DetectionReport {
  std::string user;
  DayIndex day = 0;
  std::set<SystemId> novel;
  std::vector<Alert> alerts;
  // Known (non-novel) test-day systems flagged by some member.
  std::vector<Alert> informational;
  int fits_performed = 0;
};

struct DetectOptions {
  std::uint64_t seed = 0;
  PreprocessOptions preprocess;
  NmfOptions nmf;
  MeasureOptions measures;
};

// Fits every member on all vertices of the history (test day included) when
// the test day has novel systems; throws MissingGraphError for an unknown day.
DetectionReport detect(const LoginHistory& history, const Ensemble& ensemble, DayIndex test_day,
                       const DetectOptions& options = {});

}  // namespace lmd
