#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lmd/login_graph.hpp"

namespace lmd {

// Vertex measures. The index is stable: model labels and file formats use it.
enum class Measure : std::uint8_t {
  out_degree = 0,
  out_degree_rescaled = 1,
  in_degree = 2,
  in_degree_rescaled = 3,
  clustering = 4,
  katz = 5,
  ego_degree = 6,
  out_weight = 7,
  in_weight = 8,
  degree = 9,
  ecc_ego_reduced = 10,
  ecc_weight_reduced = 11,
  eccentricity = 12,
};

inline constexpr std::size_t kMeasureCount = 13;

std::string_view measure_name(Measure m);
constexpr int index_of(Measure m) { return static_cast<int>(m); }
// Throws std::invalid_argument outside [0, 12].
Measure measure_from_index(int index);
std::vector<Measure> all_measures();

struct DegreeSummary {
  std::int64_t k_in = 0;
  std::int64_t k_out = 0;
  std::int64_t w_in = 0;
  std::int64_t w_out = 0;
  std::int64_t k = 0;

  bool operator==(const DegreeSummary&) const = default;
};

// Throws std::invalid_argument if v is not a vertex of the graph.
DegreeSummary degrees_and_weights(const LoginGraph& graph, const SystemId& v);

// (k_in / (w_in + 1), k_out / (w_out + 1))
std::pair<double, double> rescaled_degrees(std::int64_t k_in, std::int64_t w_in,
                                           std::int64_t k_out, std::int64_t w_out);

// Local clustering coefficient on the undirected simplification; 0 when the
// vertex has fewer than two neighbours.
double local_clustering(const LoginGraph& graph, const SystemId& v);

enum class KatzOrientation {
  out_neighbors,  // e(v) = alpha * sum_s A[v][s] e(s) + beta
  in_neighbors,   // propagate along A^T instead
};

inline constexpr double kKatzDefaultAlpha = 0.1;
inline constexpr double kKatzDefaultBeta = 1.0;

// Solves e = alpha * A e + beta * 1 as a dense linear system. Throws
// DivergentAttenuationError when alpha * rho(A) >= 1.
std::map<SystemId, double> katz_centrality(
    const LoginGraph& graph, double alpha, double beta,
    KatzOrientation orientation = KatzOrientation::out_neighbors);

// Spectral radius of the binary adjacency matrix. Exactly 0 for acyclic
// graphs; otherwise a power-iteration estimate (Collatz-Wielandt bracket on
// A + I, converged to 1e-12).
double spectral_radius(const LoginGraph& graph);

// min(0.1, 0.9 / rho(A)) when rho(A) > 0, else 0.1.
double default_katz_alpha(const LoginGraph& graph);

// E(v) = k(v) + sum over undirected neighbours s of k(s), with k = k_in + k_out.
std::int64_t ego_degree(const LoginGraph& graph, const SystemId& v);

inline constexpr std::size_t kEccentricityVertexCap = 200;

// Length of the longest simple directed path starting at v. Cyclic graphs
// above `vertex_cap` vertices are rejected with std::length_error.
std::int64_t eccentricity(const LoginGraph& graph, const SystemId& v,
                          std::size_t vertex_cap = kEccentricityVertexCap);

// (ecc / (E + 1), ecc / (w_out + 1))
std::pair<double, double> reduced_eccentricities(std::int64_t ecc, std::int64_t ego,
                                                 std::int64_t w_out);

struct MeasureOptions {
  KatzOrientation katz_orientation = KatzOrientation::out_neighbors;
  std::optional<double> katz_alpha;  // unset: default_katz_alpha(graph)
  double katz_beta = kKatzDefaultBeta;
  std::size_t eccentricity_vertex_cap = kEccentricityVertexCap;
};

using MeasureRows = Eigen::Matrix<double, Eigen::Dynamic, static_cast<int>(kMeasureCount),
                                  Eigen::RowMajor>;

// All 13 measures for every vertex of one graph, rows in ascending system
// order.
struct MeasureTable {
  DayIndex day = 0;
  std::vector<SystemId> systems;
  MeasureRows values;
  double katz_alpha = kKatzDefaultAlpha;
};

MeasureTable compute_measure_table(const LoginGraph& graph, const MeasureOptions& options = {});

// Per-graph tables, one OpenMP task per graph. `workers` <= 0 uses the
// OpenMP default. Output is identical to the serial version.
std::vector<MeasureTable> compute_measure_tables(std::span<const LoginGraph> graphs,
                                                 const MeasureOptions& options = {},
                                                 int workers = 0);
std::vector<MeasureTable> compute_measure_tables_serial(std::span<const LoginGraph> graphs,
                                                        const MeasureOptions& options = {});

// Vertices x selected measures. Rows ascending by (day, system).
struct FeatureMatrix {
  std::vector<VertexKey> rows;
  std::vector<Measure> columns;
  Eigen::MatrixXd values;
};

// `measures` must be non-empty, distinct and ascending.
FeatureMatrix build_feature_matrix(std::span<const LoginGraph> graphs,
                                   std::span<const Measure> measures,
                                   const MeasureOptions& options = {});

// Stacks precomputed tables (sorted by day, then system) and keeps the chosen
// columns.
FeatureMatrix assemble_features(std::span<const MeasureTable* const> tables,
                                std::span<const Measure> measures);

void validate_measure_selection(std::span<const Measure> measures);

// Header `day,system,m<i>...`, one line per row, full double precision.
void write_feature_csv(std::ostream& out, const FeatureMatrix& features);

}  // namespace lmd
