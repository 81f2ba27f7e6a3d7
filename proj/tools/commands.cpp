#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "lmd/baseline.hpp"
#include "lmd/errors.hpp"
#include "lmd/io.hpp"
#include "lmd/login_graph.hpp"

namespace lmd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& section, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!section.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : section.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& section, const char* key, T& target, const std::string& where) {
  if (!section.contains(key)) return;
  try {
    target = section.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

ArchetypeShape read_shape(const json& s, const std::string& where, ArchetypeShape shape) {
  check_keys(s, where, {"pool_min", "pool_max", "fanout_min", "fanout_max", "weight_min", "weight_max"});
  read(s, "pool_min", shape.pool_min, where);
  read(s, "pool_max", shape.pool_max, where);
  read(s, "fanout_min", shape.fanout_min, where);
  read(s, "fanout_max", shape.fanout_max, where);
  read(s, "weight_min", shape.weight_min, where);
  read(s, "weight_max", shape.weight_max, where);
  return shape;
}

struct LoadedHistory {
  fs::path file;
  LoginHistory history;
};

std::vector<LoadedHistory> load_histories(const RunConfig& config) {
  const fs::path dir = config.histories_dir();
  if (!fs::is_directory(dir)) throw UnreadableInputError("no history directory at " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<LoadedHistory> out;
  for (const auto& f : files) {
    LoginHistory h = io::history_from_json(io::read_json(f));
    if (!config.users.empty() &&
        std::find(config.users.begin(), config.users.end(), h.user()) == config.users.end())
      continue;
    out.push_back({f, std::move(h)});
  }
  return out;
}

EvalConfig eval_for(const RunConfig& config, InjectionMode mode) {
  EvalConfig e = config.eval;
  e.seed = config.require_seed();
  e.mode = mode;
  e.workers = config.workers;
  return e;
}

fs::path user_dir(const fs::path& root, const std::string& user) { return root / file_stem(user); }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

// ---------------------------------------------------------------------------

fs::path RunConfig::events_path() const { return events.empty() ? out / "events.csv" : events; }
fs::path RunConfig::histories_dir() const { return histories.empty() ? out / "histories" : histories; }
fs::path RunConfig::ensembles_dir() const { return ensembles.empty() ? out / "search" : ensembles; }

std::uint64_t RunConfig::require_seed() const {
  if (!seed) throw ConfigError("a seed is required (config \"seed\" or --seed)");
  return *seed;
}

void RunConfig::validate() const {
  require_seed();
  try {
    ingest.validate();
    synth.validate();
    eval.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (search.dims.empty()) throw ConfigError("search.dims must not be empty");
  for (int d : search.dims)
    if (d != 2 && d != 3) throw ConfigError("search.dims entries must be 2 or 3");
  if (search.roles < 1) throw ConfigError("search.roles must be >= 1");
  if (!(search.alpha > 0.0 && search.alpha < 1.0)) throw ConfigError("search.alpha must be in (0, 1)");
  if (search.modes.empty()) throw ConfigError("search.modes must not be empty");
  if (!(search.ensemble.pool_fraction > 0.0 && search.ensemble.pool_fraction <= 1.0))
    throw ConfigError("search.pool_fraction must be in (0, 1]");
  for (double a : roc_alphas)
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("evaluate.roc_alphas must lie in (0, 1)");
  if (min_days < 1) throw ConfigError("ingest.min_days must be >= 1");
}

RunConfig config_from_json(const json& doc) {
  RunConfig c;
  check_keys(doc, "config",
             {"schema_version", "seed", "workers", "paths", "ingest", "simulate", "search", "evaluate",
              "detect", "baseline", "users"});
  if (!doc.contains("schema_version") || doc.at("schema_version") != io::kSchemaVersion)
    throw ConfigError("config: unsupported or missing schema_version");
  if (doc.contains("seed")) {
    std::uint64_t s = 0;
    read(doc, "seed", s, "config");
    c.seed = s;
  }
  read(doc, "workers", c.workers, "config");
  read(doc, "users", c.users, "config");

  if (doc.contains("paths")) {
    const json& p = doc.at("paths");
    check_keys(p, "paths", {"events", "out", "histories", "ensembles"});
    std::string s;
    if (p.contains("events")) { read(p, "events", s, "paths"); c.events = s; }
    if (p.contains("out")) { read(p, "out", s, "paths"); c.out = s; }
    if (p.contains("histories")) { read(p, "histories", s, "paths"); c.histories = s; }
    if (p.contains("ensembles")) { read(p, "ensembles", s, "paths"); c.ensembles = s; }
  }
  if (doc.contains("ingest")) {
    const json& s = doc.at("ingest");
    check_keys(s, "ingest", {"event_codes", "domain_controllers", "day_boundary_offset_seconds",
                             "drop_self_loops", "min_days"});
    read(s, "event_codes", c.ingest.accepted_event_codes, "ingest");
    read(s, "domain_controllers", c.ingest.domain_controllers, "ingest");
    std::int64_t offset = 0;
    read(s, "day_boundary_offset_seconds", offset, "ingest");
    c.ingest.day_boundary_offset = std::chrono::seconds(offset);
    read(s, "drop_self_loops", c.ingest.drop_self_loops, "ingest");
    read(s, "min_days", c.min_days, "ingest");
  }
  if (doc.contains("simulate")) {
    const json& s = doc.at("simulate");
    check_keys(s, "simulate", {"user_count", "days", "start_day", "star_share", "chain_share",
                               "sprawl_share", "novel_rate", "activity_rate", "star", "chain", "sprawl"});
    read(s, "user_count", c.synth.user_count, "simulate");
    read(s, "days", c.synth.days, "simulate");
    read(s, "start_day", c.synth.start_day, "simulate");
    read(s, "star_share", c.synth.star_share, "simulate");
    read(s, "chain_share", c.synth.chain_share, "simulate");
    read(s, "sprawl_share", c.synth.sprawl_share, "simulate");
    read(s, "novel_rate", c.synth.novel_rate, "simulate");
    read(s, "activity_rate", c.synth.activity_rate, "simulate");
    if (s.contains("star")) c.synth.star = read_shape(s.at("star"), "simulate.star", c.synth.star);
    if (s.contains("chain")) c.synth.chain = read_shape(s.at("chain"), "simulate.chain", c.synth.chain);
    if (s.contains("sprawl")) c.synth.sprawl = read_shape(s.at("sprawl"), "simulate.sprawl", c.synth.sprawl);
  }
  if (doc.contains("search")) {
    const json& s = doc.at("search");
    check_keys(s, "search", {"compression", "dims", "roles", "alpha", "modes", "iters", "split",
                             "pool_fraction", "include_fpr_ties", "nmf_max_sweeps", "nmf_tol",
                             "nmf_max_scaling", "pca_standardize", "katz_orientation"});
    std::string text;
    if (s.contains("compression")) {
      read(s, "compression", text, "search");
      c.search.compression = parse_compression(text);
    }
    read(s, "dims", c.search.dims, "search");
    read(s, "roles", c.search.roles, "search");
    read(s, "alpha", c.search.alpha, "search");
    if (s.contains("modes")) {
      std::vector<std::string> modes;
      read(s, "modes", modes, "search");
      c.search.modes.clear();
      for (const auto& m : modes) {
        const InjectionMode mode = parse_injection_mode(m);
        if (std::find(c.search.modes.begin(), c.search.modes.end(), mode) == c.search.modes.end())
          c.search.modes.push_back(mode);
      }
    }
    read(s, "iters", c.eval.iters, "search");
    read(s, "split", c.eval.split, "search");
    read(s, "pool_fraction", c.search.ensemble.pool_fraction, "search");
    read(s, "include_fpr_ties", c.search.ensemble.include_fpr_ties, "search");
    read(s, "nmf_max_sweeps", c.eval.nmf.max_sweeps, "search");
    read(s, "nmf_tol", c.eval.nmf.tol, "search");
    read(s, "nmf_max_scaling", c.eval.preprocess.nmf_max_scaling, "search");
    read(s, "pca_standardize", c.eval.preprocess.pca_standardize, "search");
    if (s.contains("katz_orientation")) {
      read(s, "katz_orientation", text, "search");
      if (text == "out_neighbors") c.eval.measures.katz_orientation = KatzOrientation::out_neighbors;
      else if (text == "in_neighbors") c.eval.measures.katz_orientation = KatzOrientation::in_neighbors;
      else throw ConfigError("search.katz_orientation: unknown value '" + text + "'");
    }
  }
  if (doc.contains("evaluate")) {
    const json& s = doc.at("evaluate");
    check_keys(s, "evaluate", {"roc_alphas"});
    read(s, "roc_alphas", c.roc_alphas, "evaluate");
  }
  if (doc.contains("detect")) {
    const json& s = doc.at("detect");
    check_keys(s, "detect", {"day"});
    if (s.contains("day")) {
      const json& d = s.at("day");
      c.detect_day = d.is_string() ? parse_day(d.get<std::string>()) : d.get<DayIndex>();
    }
  }
  if (doc.contains("baseline")) {
    const json& s = doc.at("baseline");
    check_keys(s, "baseline", {"threshold"});
    if (s.contains("threshold")) {
      double t = 0.0;
      read(s, "threshold", t, "baseline");
      c.baseline_threshold = t;
    }
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

DayIndex parse_day(const std::string& text) {
  if (text.find('-', 1) != std::string::npos) {
    const auto ts = parse_timestamp(text + "T00:00:00Z");
    if (!ts) throw ConfigError("bad date '" + text + "'");
    return *ts >= 0 ? *ts / 86400 : -((-*ts + 86399) / 86400);
  }
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad day '" + text + "'");
  }
}

std::string file_stem(const std::string& user) {
  std::string out;
  for (unsigned char c : user) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.') out += static_cast<char>(c);
    else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  if (out.empty() || out == "." || out == "..") out = "%" + out;
  return out;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const RunConfig& config, std::ostream& log) {
  SynthConfig synth = config.synth;
  synth.seed = config.require_seed();
  const SyntheticCorpus corpus = generate_synthetic_corpus(synth);
  std::ostringstream csv;
  write_events(csv, corpus.events);
  write_text(config.out / "events.csv", csv.str());
  json users = json::object();
  users["schema_version"] = io::kSchemaVersion;
  users["kind"] = "synthetic_users";
  json list = json::array();
  for (const auto& [user, kind] : corpus.archetypes)
    list.push_back({{"user", user}, {"archetype", std::string(to_string(kind))}});
  users["users"] = std::move(list);
  io::write_json(config.out / "archetypes.json", users);
  log << "simulate: " << corpus.events.size() << " events for " << corpus.archetypes.size()
      << " users\n";
  return kOk;
}

int cmd_ingest(const RunConfig& config, std::ostream& log) {
  config.require_seed();
  const ParseResult parsed = parse_events_file(config.events_path(), config.ingest);
  const std::vector<AuthEvent> kept = filter_events(parsed.events, config.ingest);
  const auto histories = build_daily_graphs(kept, config.ingest);

  json summary = json::object();
  summary["schema_version"] = io::kSchemaVersion;
  summary["kind"] = "ingest_summary";
  summary["rows_parsed"] = parsed.events.size();
  summary["rows_skipped"] = parsed.skipped;
  summary["events_kept"] = kept.size();
  json users = json::array();
  std::size_t n_kept = 0, n_excluded = 0;
  std::set<std::string> stems;
  for (const auto& [user, history] : histories) {
    const HistoryVerdict verdict = validate_history(history, config.min_days);
    json entry = {{"user", user}, {"days", history.size()}};
    if (verdict.ok) {
      std::string stem = file_stem(user);
      if (!stems.insert(stem).second) throw std::logic_error("duplicate history file for " + user);
      io::write_json(config.histories_dir() / (stem + ".json"), io::to_json(history));
      entry["status"] = "kept";
      entry["file"] = stem + ".json";
      ++n_kept;
    } else {
      entry["status"] = "excluded";
      entry["reason"] = verdict.reason;
      ++n_excluded;
    }
    users.push_back(std::move(entry));
  }
  summary["users_kept"] = n_kept;
  summary["users_excluded"] = n_excluded;
  summary["users"] = std::move(users);
  io::write_json(config.out / "ingest_summary.json", summary);
  if (kept.empty()) log << "warning: no events left after filtering\n";
  log << "ingest: " << n_kept << " histories written, " << n_excluded << " users excluded\n";
  return kOk;
}

int cmd_search(const RunConfig& config, std::ostream& log) {
  config.validate();
  const auto histories = load_histories(config);
  json summary = json::object();
  summary["schema_version"] = io::kSchemaVersion;
  summary["kind"] = "search_summary";
  json users = json::array();
  for (const auto& [file, history] : histories) {
    const fs::path dir = user_dir(config.ensembles_dir(), history.user());
    std::vector<Ensemble> per_mode;
    std::string skipped;
    for (InjectionMode mode : config.search.modes) {
      const EvalConfig eval = eval_for(config, mode);
      std::vector<ModelScore> scores;
      try {
        scores = search_models(history, config.search.compression, config.search.dims, eval,
                               config.search.roles, config.search.alpha);
      } catch (const NoNovelSystemsError& e) {
        skipped = e.what();
        break;
      }
      std::ostringstream csv;
      io::write_scores_csv(csv, scores);
      write_text(dir / (std::string(to_string(mode)) + "_scores.csv"), csv.str());
      per_mode.push_back(build_ensemble(scores, history.user(), mode, config.search.ensemble));
      io::write_json(dir / (std::string(to_string(mode)) + "_ensemble.json"), io::to_json(per_mode.back()));
    }
    if (!skipped.empty()) {
      log << "search: skipping " << history.user() << ": " << skipped << "\n";
      users.push_back({{"user", history.user()}, {"status", "skipped"}, {"reason", skipped}});
      continue;
    }
    const Ensemble composite = composite_ensemble(per_mode);
    io::write_json(dir / "composite_ensemble.json", io::to_json(composite));
    json labels = json::array();
    for (const auto& m : composite.members) labels.push_back(m.label());
    users.push_back({{"user", history.user()}, {"status", "ok"}, {"members", labels}});
    log << "search: " << history.user() << " -> " << composite.members.size() << " member(s)\n";
  }
  summary["users"] = std::move(users);
  io::write_json(config.ensembles_dir() / "summary.json", summary);
  return kOk;
}

int cmd_evaluate(const RunConfig& config, std::ostream& log) {
  config.validate();
  const auto histories = load_histories(config);
  json summary = json::object();
  summary["schema_version"] = io::kSchemaVersion;
  summary["kind"] = "evaluate_summary";
  json rows = json::array();
  for (const auto& [file, history] : histories) {
    for (InjectionMode mode : config.search.modes) {
      const fs::path ens_path =
          user_dir(config.ensembles_dir(), history.user()) / (std::string(to_string(mode)) + "_ensemble.json");
      if (!fs::exists(ens_path)) {
        log << "evaluate: no " << to_string(mode) << " ensemble for " << history.user() << ", skipped\n";
        rows.push_back({{"user", history.user()}, {"mode", std::string(to_string(mode))}, {"status", "skipped"},
                        {"reason", "no ensemble"}});
        continue;
      }
      const Ensemble ensemble = io::ensemble_from_json(io::read_json(ens_path));
      const EnsembleReport report = evaluate_ensemble(history, ensemble, eval_for(config, mode), config.roc_alphas);
      io::write_json(config.out / "evaluate" / file_stem(history.user()) /
                         (std::string(to_string(mode)) + ".json"),
                     io::to_json(report));
      rows.push_back({{"user", history.user()}, {"mode", std::string(to_string(mode))}, {"status", "ok"},
                      {"mean_fpr", report.mean_fpr}, {"mu_tpr", report.mu_tpr}});
      log << "evaluate: " << history.user() << " " << to_string(mode) << " fpr=" << report.mean_fpr
          << " mu_tpr=" << report.mu_tpr << "\n";
    }
  }
  summary["results"] = std::move(rows);
  io::write_json(config.out / "evaluate" / "summary.json", summary);
  return kOk;
}

int cmd_detect(const RunConfig& config, std::ostream& log) {
  config.validate();
  if (!config.detect_day) throw ConfigError("detect needs a day (config detect.day or --day)");
  const auto histories = load_histories(config);
  DetectOptions options;
  options.seed = config.require_seed();
  options.preprocess = config.eval.preprocess;
  options.nmf = config.eval.nmf;
  options.measures = config.eval.measures;
  for (const auto& [file, history] : histories) {
    history.at(*config.detect_day);
    // A day without novel systems needs no ensemble; search skips users that
    // never have any.
    Ensemble ensemble{history.user(), {}, {}};
    const fs::path ens_path = user_dir(config.ensembles_dir(), history.user()) / "composite_ensemble.json";
    if (!novel_systems(history, *config.detect_day).empty()) {
      if (!fs::exists(ens_path))
        throw UnreadableInputError("missing ensemble for user '" + history.user() + "': " + ens_path.string());
      ensemble = io::ensemble_from_json(io::read_json(ens_path));
    }
    const DetectionReport report = detect(history, ensemble, *config.detect_day, options);
    io::write_json(config.out / "detect" / (file_stem(history.user()) + "_" +
                                            std::to_string(*config.detect_day) + ".json"),
                   io::to_json(report));
    log << "detect: " << history.user() << " day " << *config.detect_day << ": "
        << report.alerts.size() << " alert(s)\n";
  }
  return kOk;
}

int cmd_baseline(const RunConfig& config, std::ostream& log) {
  config.validate();
  if (!config.baseline_threshold)
    throw ConfigError("baseline needs a threshold (config baseline.threshold or --threshold)");
  const auto histories = load_histories(config);
  for (const auto& [file, history] : histories) {
    if (history.size() < 3) {
      log << "baseline: " << history.user() << " has fewer than 3 graphs, skipped\n";
      continue;
    }
    const BaselineReport report =
        baseline_report(history, *config.baseline_threshold, config.eval.measures, config.workers);
    io::write_json(config.out / "baseline" / (file_stem(history.user()) + ".json"), io::to_json(report));
    log << "baseline: " << history.user() << " " << report.flagged.size() << " flagged day(s)\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Novel-login anomaly detection over daily login graphs"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, input, day, users;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<double> threshold;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Master seed (overrides config)");
  app.add_option("--workers", workers, "Worker threads (0: OpenMP default)");
  app.add_option("--out", out_dir, "Output directory (overrides config)");

  auto* simulate = app.add_subcommand("simulate", "Write a seeded synthetic event corpus");
  auto* ingest = app.add_subcommand("ingest", "Parse events into per-user login histories");
  ingest->add_option("--input", input, "Event CSV (overrides config paths.events)");
  auto* search = app.add_subcommand("search", "Score the model grid and build ensembles");
  auto* evaluate = app.add_subcommand("evaluate", "Re-run the protocols for each ensemble");
  auto* detect_cmd = app.add_subcommand("detect", "Test one day against the ensembles");
  detect_cmd->add_option("--day", day, "Day index or YYYY-MM-DD");
  auto* baseline = app.add_subcommand("baseline", "Graph-level distance baseline");
  baseline->add_option("--threshold", threshold, "Mean Canberra distance threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (seed) config.seed = seed;
    if (workers) config.workers = *workers;
    if (!out_dir.empty()) config.out = out_dir;
    if (!input.empty()) config.events = input;
    if (!day.empty()) config.detect_day = parse_day(day);
    if (threshold) config.baseline_threshold = threshold;
    config.validate();

    if (simulate->parsed()) return cmd_simulate(config, err);
    if (ingest->parsed()) return cmd_ingest(config, err);
    if (search->parsed()) return cmd_search(config, err);
    if (evaluate->parsed()) return cmd_evaluate(config, err);
    if (detect_cmd->parsed()) return cmd_detect(config, err);
    if (baseline->parsed()) return cmd_baseline(config, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}

}  // namespace lmd::cli
