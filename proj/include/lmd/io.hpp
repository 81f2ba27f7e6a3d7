#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmd/adversarial.hpp"
#include "lmd/baseline.hpp"
#include "lmd/compression.hpp"
#include "lmd/evaluation.hpp"
#include "lmd/login_graph.hpp"

namespace lmd::io {

using nlohmann::json;

// Every document carries this value under "schema_version".
inline constexpr int kSchemaVersion = 1;

// Readers throw UnreadableInputError for missing files, malformed JSON,
// a wrong schema version or missing fields.
json read_json(const std::filesystem::path& path);
// Two-space indent, trailing newline, keys in insertion order.
void write_json(const std::filesystem::path& path, const json& doc);
std::string dump(const json& doc);

// {"schema_version", "user", "graphs": [{"day", "vertices": [...],
//   "edges": [[src, dst, weight], ...]}]}
json to_json(const LoginHistory& history);
LoginHistory history_from_json(const json& doc);

json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const json& doc);

json to_json(const Ensemble& ensemble);
Ensemble ensemble_from_json(const json& doc);

// Model files: kind, roles, alpha, scaling divisors and matrices as row
// arrays.
json to_json(const NmfModel& model, double alpha);
json to_json(const PcaModel& model, double alpha);
NmfModel nmf_model_from_json(const json& doc);
PcaModel pca_model_from_json(const json& doc);

json to_json(const EnsembleReport& report);
json to_json(const DetectionReport& report);
json to_json(const BaselineReport& report);
json catalog_to_json(std::span<const AdversarialGraph> catalog);

// One row per model: label, measures, compression, roles, alpha, FPR
// statistics, mean TPR over types and one column per type.
void write_scores_csv(std::ostream& out, std::span<const ModelScore> scores);

// Full-precision decimal text for a double.
std::string format_double(double value);

}  // namespace lmd::io
