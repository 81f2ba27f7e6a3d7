#include "lmd/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <omp.h>

#include "lmd/errors.hpp"
#include "lmd/random.hpp"

namespace lmd {

namespace {

Eigen::MatrixXd stack_features(std::span<const MeasureTable* const> tables,
                               std::span<const Measure> measures) {
  Eigen::Index rows = 0;
  for (const auto* t : tables) rows += t->values.rows();
  Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(measures.size()));
  Eigen::Index r = 0;
  for (const auto* t : tables) {
    const Eigen::Index n = t->values.rows();
    for (std::size_t c = 0; c < measures.size(); ++c)
      x.col(static_cast<Eigen::Index>(c)).segment(r, n) = t->values.col(index_of(measures[c]));
    r += n;
  }
  return x;
}

struct MeanAndError {
  double mean = 0.0;
  double standard_error = 0.0;
};

MeanAndError mean_and_error(const std::vector<double>& xs) {
  MeanAndError out;
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

// Fraction of target rows flagged; nullopt when the sample has no targets.
std::optional<double> target_rate(const ProtocolSample& sample, const std::vector<char>& flags) {
  if (sample.target_count == 0) return std::nullopt;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags[i] && sample.target[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(sample.target_count);
}

bool any_target_flagged(const ProtocolSample& sample, const std::vector<char>& flags) {
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags[i] && sample.target[i]) return true;
  return false;
}

template <typename Fn>
void parallel_for(std::size_t count, int workers, bool parallel, Fn&& fn) {
  std::vector<std::exception_ptr> failures(count);
  const auto n = static_cast<std::ptrdiff_t>(count);
  if (parallel) {
    const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (...) {
        failures[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(static_cast<std::size_t>(i));
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
}

}  // namespace

std::string_view to_string(InjectionMode mode) {
  return mode == InjectionMode::novel_to_novel ? "novel_to_novel" : "novel_to_known";
}

InjectionMode parse_injection_mode(std::string_view text) {
  if (text == "novel_to_novel") return InjectionMode::novel_to_novel;
  if (text == "novel_to_known") return InjectionMode::novel_to_known;
  throw ConfigError("unknown injection mode '" + std::string(text) + "'");
}

void ModelSpec::validate() const {
  if (measures.size() < 2 || measures.size() > 3)
    throw std::invalid_argument("model must use 2 or 3 measures");
  validate_measure_selection(measures);
  if (roles < 1) throw std::invalid_argument("roles must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
}

std::string ModelSpec::label() const {
  std::string out(to_string(compression));
  out += "(";
  for (std::size_t i = 0; i < measures.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(index_of(measures[i]));
  }
  out += ")";
  return out;
}

void EvalConfig::validate() const {
  if (iters < 1) throw std::invalid_argument("iters must be >= 1");
  if (!(split > 0.0 && split < 1.0)) throw std::invalid_argument("split must be in (0, 1)");
}

double ModelScore::mean_tpr_over_types() const {
  if (mean_tpr.empty()) return 0.0;
  return std::accumulate(mean_tpr.begin(), mean_tpr.end(), 0.0) /
         static_cast<double>(mean_tpr.size());
}

std::uint64_t split_seed(std::uint64_t master, const std::string& user, int iteration) {
  return SeedPath(master).with(user).with("split").with(static_cast<std::uint64_t>(iteration)).seed();
}

std::uint64_t injection_seed(std::uint64_t master, const std::string& user, InjectionMode mode,
                             int type_index, int iteration) {
  return SeedPath(master)
      .with(user)
      .with("inject")
      .with(to_string(mode))
      .with(static_cast<std::uint64_t>(type_index))
      .with(static_cast<std::uint64_t>(iteration))
      .seed();
}

std::uint64_t fit_seed(std::uint64_t master, const std::string& user, int type_index,
                       int iteration) {
  return SeedPath(master)
      .with(user)
      .with("fit")
      .with(static_cast<std::uint64_t>(type_index + 1))
      .with(static_cast<std::uint64_t>(iteration))
      .seed();
}

std::size_t kept_count(std::size_t graphs, double split) {
  const double raw = std::ceil(split * static_cast<double>(graphs) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(raw), 1, graphs);
}

// ---------------------------------------------------------------------------

ProtocolContext::ProtocolContext(const LoginHistory& history, const EvalConfig& config)
    : history_(&history), config_(config), all_systems_(history.all_systems()) {
  config_.validate();
  if (history.size() == 0) throw std::invalid_argument("history has no graphs");
  tables_ = compute_measure_tables(history.graphs(), config_.measures, config_.workers);

  const std::size_t m = history.size();
  const std::size_t n_keep = kept_count(m, config_.split);
  kept_.resize(static_cast<std::size_t>(config_.iters));
  fpr_samples_.resize(static_cast<std::size_t>(config_.iters));
  for (int j = 0; j < config_.iters; ++j) {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(split_seed(config_.seed, history.user(), j));
    rng.shuffle(std::span<std::size_t>(order));
    order.resize(n_keep);
    kept_[static_cast<std::size_t>(j)] = order;

    std::vector<std::size_t> by_day = order;
    std::sort(by_day.begin(), by_day.end());
    std::vector<LoginGraph> subset;
    subset.reserve(by_day.size());
    for (std::size_t i : by_day) subset.push_back(history.graphs()[i]);
    const std::set<VertexKey> novel = novel_in_subset(subset);

    ProtocolSample& sample = fpr_samples_[static_cast<std::size_t>(j)];
    sample.fit_seed = fit_seed(config_.seed, history.user(), -1, j);
    for (std::size_t i : by_day) {
      const MeasureTable& t = tables_[i];
      sample.tables.push_back(&t);
      for (const auto& system : t.systems) {
        const bool is_novel = novel.contains(VertexKey{t.day, system});
        sample.target.push_back(is_novel ? 1 : 0);
        if (is_novel) ++sample.target_count;
      }
    }
  }

  type_once_ = std::make_unique<std::once_flag[]>(type_count());
  trials_.resize(type_count());
}

bool ProtocolContext::any_novel() const {
  return std::any_of(fpr_samples_.begin(), fpr_samples_.end(),
                     [](const ProtocolSample& s) { return s.target_count > 0; });
}

ProtocolContext::Trial ProtocolContext::make_trial(int type_index, int iteration) const {
  const AdversarialGraph& adv = adversarial_catalog().at(static_cast<std::size_t>(type_index));
  const auto& order = kept(iteration);
  Rng rng(injection_seed(config_.seed, history_->user(), config_.mode, type_index, iteration));
  const std::size_t host = order[rng.uniform_index(order.size())];

  FreshIdSource fresh(all_systems_, std::string(kInjectedIdPrefix));
  const LoginGraph& parent = history_->graphs()[host];
  Injection inj = config_.mode == InjectionMode::novel_to_novel
                      ? inject_novel_to_novel(parent, adv, fresh)
                      : inject_novel_to_known(parent, adv, rng, fresh);

  Trial trial;
  trial.injected_table = compute_measure_table(inj.graph, config_.measures);
  trial.sample.fit_seed = fit_seed(config_.seed, history_->user(), type_index, iteration);

  std::vector<std::size_t> by_day = order;
  std::sort(by_day.begin(), by_day.end());
  for (std::size_t i : by_day) {
    const MeasureTable& t = i == host ? trial.injected_table : tables_[i];
    // Pointers into the trial are fixed up once the trial has its final address.
    trial.sample.tables.push_back(i == host ? nullptr : &t);
    for (const auto& system : t.systems) {
      const bool injected = i == host && inj.injected.contains(VertexKey{t.day, system});
      trial.sample.target.push_back(injected ? 1 : 0);
      if (injected) ++trial.sample.target_count;
    }
  }
  return trial;
}

void ProtocolContext::prepare_type(int type_index) const {
  std::call_once(type_once_[static_cast<std::size_t>(type_index)], [&] {
    std::vector<Trial> trials;
    trials.reserve(static_cast<std::size_t>(config_.iters));
    for (int j = 0; j < config_.iters; ++j) trials.push_back(make_trial(type_index, j));
    for (auto& trial : trials)
      for (auto& ptr : trial.sample.tables)
        if (ptr == nullptr) ptr = &trial.injected_table;
    trials_[static_cast<std::size_t>(type_index)] = std::move(trials);
  });
}

void ProtocolContext::prepare_all_trials() const {
  parallel_for(type_count(), config_.workers, true,
               [&](std::size_t t) { prepare_type(static_cast<int>(t)); });
}

const ProtocolSample& ProtocolContext::tpr_sample(int type_index, int iteration) const {
  if (type_index < 0 || static_cast<std::size_t>(type_index) >= type_count())
    throw std::out_of_range("adversarial type index out of range");
  prepare_type(type_index);
  return trials_[static_cast<std::size_t>(type_index)][static_cast<std::size_t>(iteration)].sample;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd sample_errors(const ProtocolSample& sample, const ModelSpec& spec,
                              const EvalConfig& config) {
  const Eigen::MatrixXd x = stack_features(sample.tables, spec.measures);
  const Preprocessed pre = preprocess(x, spec.compression, config.preprocess);
  if (spec.compression == CompressionKind::nmf) {
    const NmfModel model = fit_nmf(pre.matrix, spec.roles, sample.fit_seed, config.nmf);
    return nmf_errors(pre.matrix, model);
  }
  const PcaModel model = fit_pca(pre.matrix, spec.roles);
  return pca_errors(pre.matrix, model);
}

std::vector<char> flag_rows(const Eigen::VectorXd& errors, double alpha) {
  const double threshold =
      outlier_threshold(std::span<const double>(errors.data(), static_cast<std::size_t>(errors.size())), alpha);
  std::vector<char> flags(static_cast<std::size_t>(errors.size()), 0);
  for (Eigen::Index i = 0; i < errors.size(); ++i) flags[static_cast<std::size_t>(i)] = errors(i) > threshold;
  return flags;
}

namespace {

std::optional<double> fpr_iteration(const ProtocolContext& context, const ModelSpec& spec, int j) {
  const ProtocolSample& sample = context.fpr_sample(j);
  if (sample.target_count == 0) return std::nullopt;
  return target_rate(sample, flag_rows(sample_errors(sample, spec, context.config()), spec.alpha));
}

bool tpr_iteration(const ProtocolContext& context, const ModelSpec& spec, int type_index, int j) {
  const ProtocolSample& sample = context.tpr_sample(type_index, j);
  return any_target_flagged(sample,
                            flag_rows(sample_errors(sample, spec, context.config()), spec.alpha));
}

FprEstimate summarize_fpr(const std::vector<std::optional<double>>& per_iteration) {
  std::vector<double> rates;
  FprEstimate out;
  for (const auto& r : per_iteration) {
    if (r) rates.push_back(*r);
    else ++out.skipped;
  }
  const auto me = mean_and_error(rates);
  out.mean = me.mean;
  out.standard_error = me.standard_error;
  out.contributing = static_cast<int>(rates.size());
  return out;
}

NoNovelSystemsError no_novel(const std::string& user) {
  return NoNovelSystemsError("user '" + user +
                             "': no iteration sampled any novel system; FPR is undefined");
}

}  // namespace

FprEstimate estimate_fpr(const ProtocolContext& context, const ModelSpec& spec) {
  spec.validate();
  if (!context.any_novel()) throw no_novel(context.history().user());
  std::vector<std::optional<double>> per(static_cast<std::size_t>(context.iterations()));
  for (int j = 0; j < context.iterations(); ++j) per[static_cast<std::size_t>(j)] = fpr_iteration(context, spec, j);
  return summarize_fpr(per);
}

double estimate_tpr(const ProtocolContext& context, const ModelSpec& spec, int type_index) {
  spec.validate();
  int detected = 0;
  for (int j = 0; j < context.iterations(); ++j) detected += tpr_iteration(context, spec, type_index, j);
  return static_cast<double>(detected) / context.iterations();
}

FprEstimate estimate_fpr(const LoginHistory& history, const ModelSpec& spec,
                         const EvalConfig& config) {
  const ProtocolContext context(history, config);
  return estimate_fpr(context, spec);
}

double estimate_tpr(const LoginHistory& history, const ModelSpec& spec, int type_index,
                    const EvalConfig& config) {
  const ProtocolContext context(history, config);
  return estimate_tpr(context, spec, type_index);
}

std::vector<ModelSpec> model_grid(CompressionKind compression, const std::set<int>& dims,
                                  int roles, double alpha) {
  std::vector<ModelSpec> specs;
  const int n = static_cast<int>(kMeasureCount);
  for (int d : dims) {
    if (d < 2 || d > 3) throw std::invalid_argument("model dimensions must be 2 or 3");
    std::vector<int> idx(static_cast<std::size_t>(d));
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
      ModelSpec spec;
      for (int i : idx) spec.measures.push_back(measure_from_index(i));
      spec.compression = compression;
      spec.roles = roles;
      spec.alpha = alpha;
      specs.push_back(std::move(spec));
      // Next combination in lexicographic order.
      int pos = d - 1;
      while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - d + pos) --pos;
      if (pos < 0) break;
      ++idx[static_cast<std::size_t>(pos)];
      for (int k = pos + 1; k < d; ++k) idx[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(k - 1)] + 1;
    }
  }
  return specs;
}

std::vector<ModelScore> score_models(const ProtocolContext& context,
                                     std::span<const ModelSpec> specs, bool parallel) {
  for (const auto& s : specs) s.validate();
  if (!context.any_novel()) throw no_novel(context.history().user());

  const std::size_t types = context.type_count();
  const std::size_t slots = types + 1;  // slot 0: FPR, slot 1 + t: TPR of type t
  const auto iters = static_cast<std::size_t>(context.iterations());
  if (parallel) context.prepare_all_trials();

  // Per (spec, slot): per-iteration outcomes, written by exactly one work item.
  std::vector<std::vector<std::optional<double>>> outcomes(specs.size() * slots);
  parallel_for(specs.size() * slots, context.config().workers, parallel, [&](std::size_t item) {
    const ModelSpec& spec = specs[item / slots];
    const std::size_t slot = item % slots;
    auto& out = outcomes[item];
    out.resize(iters);
    for (std::size_t j = 0; j < iters; ++j) {
      if (slot == 0) out[j] = fpr_iteration(context, spec, static_cast<int>(j));
      else out[j] = tpr_iteration(context, spec, static_cast<int>(slot - 1), static_cast<int>(j)) ? 1.0 : 0.0;
    }
  });

  std::vector<ModelScore> scores(specs.size());
  for (std::size_t s = 0; s < specs.size(); ++s) {
    ModelScore& score = scores[s];
    score.spec = specs[s];
    const FprEstimate fpr = summarize_fpr(outcomes[s * slots]);
    score.mean_fpr = fpr.mean;
    score.fpr_stderr = fpr.standard_error;
    score.fpr_iterations = fpr.contributing;
    score.fpr_skipped = fpr.skipped;
    score.mean_tpr.resize(types);
    for (std::size_t t = 0; t < types; ++t) {
      double hits = 0.0;
      for (const auto& o : outcomes[s * slots + 1 + t]) hits += *o;
      score.mean_tpr[t] = hits / static_cast<double>(iters);
    }
  }
  return scores;
}

std::vector<ModelScore> search_models(const LoginHistory& history, CompressionKind compression,
                                      const std::set<int>& dims, const EvalConfig& config,
                                      int roles, double alpha) {
  const std::vector<ModelSpec> specs = model_grid(compression, dims, roles, alpha);
  const ProtocolContext context(history, config);
  return score_models(context, specs, true);
}

std::vector<ModelScore> search_models_serial(const LoginHistory& history,
                                             CompressionKind compression,
                                             const std::set<int>& dims, const EvalConfig& config,
                                             int roles, double alpha) {
  const std::vector<ModelSpec> specs = model_grid(compression, dims, roles, alpha);
  EvalConfig serial = config;
  serial.workers = 1;
  const ProtocolContext context(history, serial);
  return score_models(context, specs, false);
}

// ---------------------------------------------------------------------------

Ensemble build_ensemble(std::span<const ModelScore> scores, const std::string& user,
                        InjectionMode mode, const EnsembleOptions& options) {
  if (scores.empty()) throw std::invalid_argument("build_ensemble: no model scores");
  std::vector<const ModelScore*> ranked;
  for (const auto& s : scores) ranked.push_back(&s);
  std::stable_sort(ranked.begin(), ranked.end(), [](const ModelScore* a, const ModelScore* b) {
    if (a->mean_fpr != b->mean_fpr) return a->mean_fpr < b->mean_fpr;
    return a->spec < b->spec;
  });
  std::size_t pool = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(options.pool_fraction * static_cast<double>(ranked.size()) - 1e-9)));
  pool = std::min(pool, ranked.size());
  if (options.include_fpr_ties) {
    const double cutoff = ranked[pool - 1]->mean_fpr;
    while (pool < ranked.size() && ranked[pool]->mean_fpr == cutoff) ++pool;
  }

  const std::size_t types = ranked.front()->mean_tpr.size();
  Ensemble ensemble;
  ensemble.user = user;
  for (std::size_t t = 0; t < types; ++t) {
    const ModelScore* best = ranked[0];
    for (std::size_t i = 1; i < pool; ++i) {
      const ModelScore* c = ranked[i];
      // Pool is already ordered by (fpr, spec); only a strictly higher TPR wins.
      if (c->mean_tpr.at(t) > best->mean_tpr.at(t)) best = c;
    }
    ensemble.provenance.push_back({mode, static_cast<int>(t), best->spec});
    ensemble.members.push_back(best->spec);
  }
  std::sort(ensemble.members.begin(), ensemble.members.end());
  ensemble.members.erase(std::unique(ensemble.members.begin(), ensemble.members.end()),
                         ensemble.members.end());
  return ensemble;
}

Ensemble composite_ensemble(std::span<const Ensemble> parts) {
  if (parts.empty()) throw std::invalid_argument("composite_ensemble: no ensembles");
  Ensemble out;
  out.user = parts.front().user;
  for (const auto& e : parts) {
    if (e.user != out.user) throw std::invalid_argument("composite_ensemble: users differ");
    out.members.insert(out.members.end(), e.members.begin(), e.members.end());
    out.provenance.insert(out.provenance.end(), e.provenance.begin(), e.provenance.end());
  }
  std::sort(out.members.begin(), out.members.end());
  out.members.erase(std::unique(out.members.begin(), out.members.end()), out.members.end());
  return out;
}

// ---------------------------------------------------------------------------

EnsembleReport evaluate_ensemble(const ProtocolContext& context, const Ensemble& ensemble,
                                 std::span<const double> roc_alphas) {
  if (ensemble.members.empty()) throw std::invalid_argument("ensemble has no members");
  for (const auto& m : ensemble.members) m.validate();
  for (double a : roc_alphas)
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("ROC alpha must be in (0, 1)");
  if (!context.any_novel()) throw no_novel(context.history().user());

  const int iters = context.iterations();
  const std::size_t types = context.type_count();
  const std::size_t sweeps = roc_alphas.size() + 1;  // 0: member alphas

  // flags_or[sweep] for one sample.
  auto union_flags = [&](const ProtocolSample& sample) {
    std::vector<std::vector<char>> out(sweeps, std::vector<char>(sample.rows(), 0));
    for (const auto& member : ensemble.members) {
      const Eigen::VectorXd errors = sample_errors(sample, member, context.config());
      for (std::size_t s = 0; s < sweeps; ++s) {
        const double alpha = s == 0 ? member.alpha : roc_alphas[s - 1];
        const auto flags = flag_rows(errors, alpha);
        for (std::size_t i = 0; i < flags.size(); ++i) out[s][i] |= flags[i];
      }
    }
    return out;
  };

  std::vector<std::vector<std::optional<double>>> fpr(sweeps, std::vector<std::optional<double>>(static_cast<std::size_t>(iters)));
  std::vector<std::vector<double>> tpr(sweeps, std::vector<double>(types, 0.0));
  for (int j = 0; j < iters; ++j) {
    const ProtocolSample& sample = context.fpr_sample(j);
    if (sample.target_count == 0) continue;
    const auto flags = union_flags(sample);
    for (std::size_t s = 0; s < sweeps; ++s) fpr[s][static_cast<std::size_t>(j)] = target_rate(sample, flags[s]);
  }
  for (std::size_t t = 0; t < types; ++t) {
    for (int j = 0; j < iters; ++j) {
      const ProtocolSample& sample = context.tpr_sample(static_cast<int>(t), j);
      const auto flags = union_flags(sample);
      for (std::size_t s = 0; s < sweeps; ++s)
        if (any_target_flagged(sample, flags[s])) tpr[s][t] += 1.0;
    }
  }
  for (auto& row : tpr)
    for (double& v : row) v /= iters;

  auto mean_of = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };

  EnsembleReport report;
  report.user = context.history().user();
  report.mode = context.config().mode;
  const FprEstimate base = summarize_fpr(fpr[0]);
  report.mean_fpr = base.mean;
  report.fpr_stderr = base.standard_error;
  report.fpr_iterations = base.contributing;
  report.fpr_skipped = base.skipped;
  report.mean_tpr = tpr[0];
  report.mu_tpr = mean_of(tpr[0]);
  for (std::size_t s = 1; s < sweeps; ++s) {
    RocPoint p;
    p.alpha = roc_alphas[s - 1];
    p.mean_fpr = summarize_fpr(fpr[s]).mean;
    p.mean_tpr = tpr[s];
    p.mu_tpr = mean_of(tpr[s]);
    report.roc.push_back(std::move(p));
  }
  return report;
}

EnsembleReport evaluate_ensemble(const LoginHistory& history, const Ensemble& ensemble,
                                 const EvalConfig& config, std::span<const double> roc_alphas) {
  const ProtocolContext context(history, config);
  return evaluate_ensemble(context, ensemble, roc_alphas);
}

// ---------------------------------------------------------------------------

DetectionReport detect(const LoginHistory& history, const Ensemble& ensemble, DayIndex test_day,
                       const DetectOptions& options) {
  DetectionReport report;
  report.user = history.user();
  report.day = test_day;
  history.at(test_day);  // throws MissingGraphError
  report.novel = novel_systems(history, test_day);
  if (report.novel.empty()) return report;
  if (ensemble.members.empty()) throw std::invalid_argument("ensemble has no members");

  const std::vector<MeasureTable> tables = compute_measure_tables(history.graphs(), options.measures);
  ProtocolSample sample;
  sample.fit_seed = SeedPath(options.seed).with(history.user()).with("detect")
                        .with(static_cast<std::uint64_t>(test_day)).seed();
  std::vector<std::pair<std::size_t, std::size_t>> test_rows;  // (row, index in test table)
  for (const auto& t : tables) {
    sample.tables.push_back(&t);
    for (std::size_t i = 0; i < t.systems.size(); ++i) {
      if (t.day == test_day) test_rows.emplace_back(sample.target.size(), i);
      sample.target.push_back(0);
    }
  }

  EvalConfig fit_config;
  fit_config.preprocess = options.preprocess;
  fit_config.nmf = options.nmf;

  std::map<SystemId, Alert> alerts, informational;
  const MeasureTable& test_table = *std::find_if(
      tables.begin(), tables.end(), [&](const MeasureTable& t) { return t.day == test_day; });
  for (const auto& member : ensemble.members) {
    member.validate();
    const Eigen::VectorXd errors = sample_errors(sample, member, fit_config);
    ++report.fits_performed;
    const double threshold = outlier_threshold(
        std::span<const double>(errors.data(), static_cast<std::size_t>(errors.size())), member.alpha);
    for (auto [row, local] : test_rows) {
      const double e = errors(static_cast<Eigen::Index>(row));
      if (!(e > threshold)) continue;
      const SystemId& system = test_table.systems[local];
      auto& bucket = report.novel.contains(system) ? alerts : informational;
      auto [it, inserted] = bucket.try_emplace(system);
      if (inserted) {
        it->second.system = system;
        it->second.member = member;
        it->second.error = e;
        it->second.threshold = threshold;
      }
      it->second.fired_by.push_back(member);
    }
  }
  for (auto& [system, alert] : alerts) report.alerts.push_back(std::move(alert));
  for (auto& [system, alert] : informational) report.informational.push_back(std::move(alert));
  return report;
}

}  // namespace lmd
