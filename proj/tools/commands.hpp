#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmd/evaluation.hpp"
#include "lmd/ingest.hpp"
#include "lmd/synth.hpp"

namespace lmd::cli {

enum ExitCode : int { kOk = 0, kUsageError = 1, kDataError = 2 };

struct SearchSettings {
  CompressionKind compression = CompressionKind::nmf;
  std::set<int> dims{2};
  int roles = 1;
  double alpha = 0.05;
  std::vector<InjectionMode> modes{InjectionMode::novel_to_novel};
  EnsembleOptions ensemble;
};

// Everything a run needs. Loaded from the JSON config, then overridden by
// command-line flags.
struct RunConfig {
  std::optional<std::uint64_t> seed;
  int workers = 0;
  std::filesystem::path out = "out";
  std::filesystem::path events;      // input for ingest; empty: <out>/events.csv
  std::filesystem::path histories;   // empty: <out>/histories
  std::filesystem::path ensembles;   // empty: <out>/search
  IngestConfig ingest;
  std::size_t min_days = 5;
  SynthConfig synth;
  SearchSettings search;
  EvalConfig eval;  // mode and seed are filled per run
  std::vector<double> roc_alphas;
  std::optional<DayIndex> detect_day;
  std::optional<double> baseline_threshold;
  std::vector<std::string> users;  // empty: every history

  std::filesystem::path events_path() const;
  std::filesystem::path histories_dir() const;
  std::filesystem::path ensembles_dir() const;
  // Throws ConfigError when the seed is missing or a setting is out of range.
  std::uint64_t require_seed() const;
  void validate() const;
};

// Throws ConfigError for an unknown key, a bad value or a schema mismatch.
RunConfig config_from_json(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

// Accepts an integer day index or a YYYY-MM-DD date.
DayIndex parse_day(const std::string& text);

// Filesystem-safe stem for a user identifier.
std::string file_stem(const std::string& user);

int cmd_simulate(const RunConfig& config, std::ostream& log);
int cmd_ingest(const RunConfig& config, std::ostream& log);
int cmd_search(const RunConfig& config, std::ostream& log);
int cmd_evaluate(const RunConfig& config, std::ostream& log);
int cmd_detect(const RunConfig& config, std::ostream& log);
int cmd_baseline(const RunConfig& config, std::ostream& log);

// Full command line; returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lmd::cli
