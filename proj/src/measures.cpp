#include "lmd/measures.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include <omp.h>

#include "lmd/errors.hpp"

namespace lmd {

namespace {

// Index-based view of a LoginGraph. Vertex indices follow the graph's sorted
// vertex order.
struct IndexedGraph {
  std::vector<SystemId> names;
  std::vector<std::vector<int>> out;   // distinct out-neighbours
  std::vector<std::vector<int>> in;    // distinct in-neighbours
  std::vector<std::vector<int>> undirected;  // sorted, no self
  std::vector<std::int64_t> w_out, w_in;

  explicit IndexedGraph(const LoginGraph& g) {
    names.assign(g.vertices().begin(), g.vertices().end());
    const std::size_t n = names.size();
    std::unordered_map<std::string_view, int> index;
    index.reserve(n);
    for (std::size_t i = 0; i < n; ++i) index.emplace(names[i], static_cast<int>(i));
    out.resize(n);
    in.resize(n);
    undirected.resize(n);
    w_out.assign(n, 0);
    w_in.assign(n, 0);
    for (const auto& [edge, w] : g.edges()) {
      const int s = index.at(edge.first);
      const int d = index.at(edge.second);
      out[s].push_back(d);
      in[d].push_back(s);
      w_out[s] += w;
      w_in[d] += w;
      if (s != d) {
        undirected[s].push_back(d);
        undirected[d].push_back(s);
      }
    }
    for (auto& nb : undirected) {
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
  }

  std::size_t size() const { return names.size(); }

  int index_of(const SystemId& v) const {
    auto it = std::lower_bound(names.begin(), names.end(), v);
    if (it == names.end() || *it != v)
      throw std::invalid_argument("vertex '" + v + "' is not in the graph");
    return static_cast<int>(it - names.begin());
  }

  std::int64_t degree(int v) const {
    return static_cast<std::int64_t>(out[v].size() + in[v].size());
  }

  // Kahn's algorithm; empty optional when the graph has a directed cycle.
  std::optional<std::vector<int>> topological_order() const {
    const std::size_t n = size();
    std::vector<int> indeg(n, 0);
    for (std::size_t v = 0; v < n; ++v)
      for (int s : out[v]) ++indeg[s];
    std::vector<int> order;
    order.reserve(n);
    for (std::size_t v = 0; v < n; ++v)
      if (indeg[v] == 0) order.push_back(static_cast<int>(v));
    for (std::size_t head = 0; head < order.size(); ++head)
      for (int s : out[order[head]])
        if (--indeg[s] == 0) order.push_back(s);
    if (order.size() != n) return std::nullopt;
    return order;
  }
};

double clustering_of(const IndexedGraph& g, int v) {
  const auto& nb = g.undirected[v];
  const std::size_t d = nb.size();
  if (d < 2) return 0.0;
  std::int64_t triangles = 0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      if (std::binary_search(g.undirected[nb[i]].begin(), g.undirected[nb[i]].end(), nb[j]))
        ++triangles;
  return 2.0 * static_cast<double>(triangles) / (static_cast<double>(d) * (d - 1));
}

std::int64_t ego_of(const IndexedGraph& g, int v) {
  std::int64_t e = g.degree(v);
  for (int s : g.undirected[v]) e += g.degree(s);
  return e;
}

double spectral_radius_of(const IndexedGraph& g) {
  if (g.size() == 0 || g.topological_order()) return 0.0;

  // Power iteration on B = A + I. For positive x, max_i (Bx)_i / x_i bounds
  // rho(B) from above and is non-increasing along the iteration.
  const std::size_t n = g.size();
  std::vector<double> x(n, 1.0), y(n);
  double upper = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 20000; ++iter) {
    for (std::size_t v = 0; v < n; ++v) {
      double acc = x[v];
      for (int s : g.out[v]) acc += x[s];
      y[v] = acc;
    }
    double ratio = 0.0, norm = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      ratio = std::max(ratio, y[v] / x[v]);
      norm = std::max(norm, y[v]);
    }
    const bool converged = upper - ratio <= 1e-13 * ratio;
    upper = std::min(upper, ratio);
    for (std::size_t v = 0; v < n; ++v) x[v] = y[v] / norm;
    if (converged && iter > 2) break;
  }
  return upper - 1.0;
}

Eigen::VectorXd katz_of(const IndexedGraph& g, double alpha, double beta,
                        KatzOrientation orientation) {
  const auto n = static_cast<Eigen::Index>(g.size());
  if (n == 0) return {};
  if (alpha < 0.0) throw std::invalid_argument("Katz alpha must be non-negative");
  if (alpha == 0.0) return Eigen::VectorXd::Constant(n, beta);
  const double rho = spectral_radius_of(g);
  if (alpha * rho >= 1.0)
    throw DivergentAttenuationError("Katz attenuation alpha=" + std::to_string(alpha) +
                                    " with spectral radius " + std::to_string(rho) +
                                    " does not converge");

  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index v = 0; v < n; ++v)
    for (int s : g.out[v]) {
      if (orientation == KatzOrientation::out_neighbors) m(v, s) -= alpha;
      else m(s, v) -= alpha;
    }
  const Eigen::VectorXd rhs = Eigen::VectorXd::Constant(n, beta);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  Eigen::VectorXd e = lu.solve(rhs);
  for (int refine = 0; refine < 4; ++refine) {
    const Eigen::VectorXd residual = rhs - m * e;
    if (residual.lpNorm<Eigen::Infinity>() < 1e-13) break;
    e += lu.solve(residual);
  }
  return e;
}

std::vector<std::int64_t> eccentricities_of(const IndexedGraph& g, std::size_t cap) {
  const std::size_t n = g.size();
  std::vector<std::int64_t> ecc(n, 0);
  if (auto order = g.topological_order()) {
    // Longest path in a DAG by reverse topological dynamic programming.
    for (auto it = order->rbegin(); it != order->rend(); ++it)
      for (int s : g.out[*it]) ecc[*it] = std::max(ecc[*it], ecc[s] + 1);
    return ecc;
  }
  if (n > cap)
    throw std::length_error("cyclic login graph with " + std::to_string(n) +
                            " vertices exceeds the eccentricity vertex cap of " +
                            std::to_string(cap));
  std::vector<char> on_path(n, 0);
  for (std::size_t start = 0; start < n; ++start) {
    std::int64_t best = 0;
    // Iterative DFS over simple paths: (vertex, next neighbour index).
    std::vector<std::pair<int, std::size_t>> stack{{static_cast<int>(start), 0}};
    on_path[start] = 1;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next < g.out[v].size()) {
        const int s = g.out[v][next++];
        if (!on_path[s]) {
          on_path[s] = 1;
          stack.emplace_back(s, 0);
          best = std::max(best, static_cast<std::int64_t>(stack.size()) - 1);
        }
      } else {
        on_path[v] = 0;
        stack.pop_back();
      }
    }
    ecc[start] = best;
  }
  return ecc;
}

}  // namespace

std::string_view measure_name(Measure m) {
  switch (m) {
    case Measure::out_degree: return "out_degree";
    case Measure::out_degree_rescaled: return "out_degree_rescaled";
    case Measure::in_degree: return "in_degree";
    case Measure::in_degree_rescaled: return "in_degree_rescaled";
    case Measure::clustering: return "clustering";
    case Measure::katz: return "katz";
    case Measure::ego_degree: return "ego_degree";
    case Measure::out_weight: return "out_weight";
    case Measure::in_weight: return "in_weight";
    case Measure::degree: return "degree";
    case Measure::ecc_ego_reduced: return "eccentricity_ego_reduced";
    case Measure::ecc_weight_reduced: return "eccentricity_weight_reduced";
    case Measure::eccentricity: return "eccentricity";
  }
  return "unknown";
}

Measure measure_from_index(int index) {
  if (index < 0 || index >= static_cast<int>(kMeasureCount))
    throw std::invalid_argument("measure index out of range: " + std::to_string(index));
  return static_cast<Measure>(index);
}

std::vector<Measure> all_measures() {
  std::vector<Measure> out;
  for (std::size_t i = 0; i < kMeasureCount; ++i) out.push_back(static_cast<Measure>(i));
  return out;
}

DegreeSummary degrees_and_weights(const LoginGraph& graph, const SystemId& v) {
  const IndexedGraph g(graph);
  const int i = g.index_of(v);
  DegreeSummary d;
  d.k_in = static_cast<std::int64_t>(g.in[i].size());
  d.k_out = static_cast<std::int64_t>(g.out[i].size());
  d.w_in = g.w_in[i];
  d.w_out = g.w_out[i];
  d.k = d.k_in + d.k_out;
  return d;
}

std::pair<double, double> rescaled_degrees(std::int64_t k_in, std::int64_t w_in,
                                           std::int64_t k_out, std::int64_t w_out) {
  return {static_cast<double>(k_in) / static_cast<double>(w_in + 1),
          static_cast<double>(k_out) / static_cast<double>(w_out + 1)};
}

double local_clustering(const LoginGraph& graph, const SystemId& v) {
  const IndexedGraph g(graph);
  return clustering_of(g, g.index_of(v));
}

std::map<SystemId, double> katz_centrality(const LoginGraph& graph, double alpha, double beta,
                                           KatzOrientation orientation) {
  const IndexedGraph g(graph);
  const Eigen::VectorXd e = katz_of(g, alpha, beta, orientation);
  std::map<SystemId, double> out;
  for (std::size_t i = 0; i < g.size(); ++i) out.emplace(g.names[i], e(static_cast<Eigen::Index>(i)));
  return out;
}

double spectral_radius(const LoginGraph& graph) { return spectral_radius_of(IndexedGraph(graph)); }

double default_katz_alpha(const LoginGraph& graph) {
  const double rho = spectral_radius(graph);
  return rho > 0.0 ? std::min(kKatzDefaultAlpha, 0.9 / rho) : kKatzDefaultAlpha;
}

std::int64_t ego_degree(const LoginGraph& graph, const SystemId& v) {
  const IndexedGraph g(graph);
  return ego_of(g, g.index_of(v));
}

std::int64_t eccentricity(const LoginGraph& graph, const SystemId& v, std::size_t vertex_cap) {
  const IndexedGraph g(graph);
  const int i = g.index_of(v);
  return eccentricities_of(g, vertex_cap)[i];
}

std::pair<double, double> reduced_eccentricities(std::int64_t ecc, std::int64_t ego,
                                                 std::int64_t w_out) {
  return {static_cast<double>(ecc) / static_cast<double>(ego + 1),
          static_cast<double>(ecc) / static_cast<double>(w_out + 1)};
}

MeasureTable compute_measure_table(const LoginGraph& graph, const MeasureOptions& options) {
  const IndexedGraph g(graph);
  const std::size_t n = g.size();

  MeasureTable table;
  table.day = graph.day();
  table.systems = g.names;
  table.katz_alpha = options.katz_alpha ? *options.katz_alpha : [&] {
    const double rho = spectral_radius_of(g);
    return rho > 0.0 ? std::min(kKatzDefaultAlpha, 0.9 / rho) : kKatzDefaultAlpha;
  }();
  table.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kMeasureCount));

  const Eigen::VectorXd katz =
      katz_of(g, table.katz_alpha, options.katz_beta, options.katz_orientation);
  const std::vector<std::int64_t> ecc = eccentricities_of(g, options.eccentricity_vertex_cap);

  for (std::size_t i = 0; i < n; ++i) {
    const int v = static_cast<int>(i);
    const auto k_in = static_cast<std::int64_t>(g.in[v].size());
    const auto k_out = static_cast<std::int64_t>(g.out[v].size());
    const std::int64_t ego = ego_of(g, v);
    const auto [in_rescaled, out_rescaled] = rescaled_degrees(k_in, g.w_in[v], k_out, g.w_out[v]);
    const auto [ecc_ego, ecc_weight] = reduced_eccentricities(ecc[i], ego, g.w_out[v]);

    auto row = table.values.row(static_cast<Eigen::Index>(i));
    row(index_of(Measure::out_degree)) = static_cast<double>(k_out);
    row(index_of(Measure::out_degree_rescaled)) = out_rescaled;
    row(index_of(Measure::in_degree)) = static_cast<double>(k_in);
    row(index_of(Measure::in_degree_rescaled)) = in_rescaled;
    row(index_of(Measure::clustering)) = clustering_of(g, v);
    row(index_of(Measure::katz)) = katz(static_cast<Eigen::Index>(i));
    row(index_of(Measure::ego_degree)) = static_cast<double>(ego);
    row(index_of(Measure::out_weight)) = static_cast<double>(g.w_out[v]);
    row(index_of(Measure::in_weight)) = static_cast<double>(g.w_in[v]);
    row(index_of(Measure::degree)) = static_cast<double>(k_in + k_out);
    row(index_of(Measure::ecc_ego_reduced)) = ecc_ego;
    row(index_of(Measure::ecc_weight_reduced)) = ecc_weight;
    row(index_of(Measure::eccentricity)) = static_cast<double>(ecc[i]);
  }
  return table;
}

std::vector<MeasureTable> compute_measure_tables_serial(std::span<const LoginGraph> graphs,
                                                        const MeasureOptions& options) {
  std::vector<MeasureTable> tables;
  tables.reserve(graphs.size());
  for (const auto& g : graphs) tables.push_back(compute_measure_table(g, options));
  return tables;
}

std::vector<MeasureTable> compute_measure_tables(std::span<const LoginGraph> graphs,
                                                 const MeasureOptions& options, int workers) {
  const auto n = static_cast<std::ptrdiff_t>(graphs.size());
  std::vector<MeasureTable> tables(graphs.size());
  std::vector<std::exception_ptr> failures(graphs.size());
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      tables[i] = compute_measure_table(graphs[i], options);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  return tables;
}

void validate_measure_selection(std::span<const Measure> measures) {
  if (measures.empty()) throw std::invalid_argument("measure selection is empty");
  for (std::size_t i = 0; i < measures.size(); ++i) {
    measure_from_index(index_of(measures[i]));
    if (i > 0 && index_of(measures[i]) <= index_of(measures[i - 1]))
      throw std::invalid_argument("measure selection must be distinct and ascending");
  }
}

FeatureMatrix assemble_features(std::span<const MeasureTable* const> tables,
                                std::span<const Measure> measures) {
  validate_measure_selection(measures);
  std::vector<const MeasureTable*> ordered(tables.begin(), tables.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const MeasureTable* a, const MeasureTable* b) { return a->day < b->day; });

  Eigen::Index rows = 0;
  for (const auto* t : ordered) rows += t->values.rows();

  FeatureMatrix fm;
  fm.columns.assign(measures.begin(), measures.end());
  fm.rows.reserve(static_cast<std::size_t>(rows));
  fm.values.resize(rows, static_cast<Eigen::Index>(measures.size()));
  Eigen::Index r = 0;
  for (const auto* t : ordered) {
    for (Eigen::Index i = 0; i < t->values.rows(); ++i, ++r) {
      fm.rows.push_back(VertexKey{t->day, t->systems[static_cast<std::size_t>(i)]});
      for (std::size_t c = 0; c < measures.size(); ++c)
        fm.values(r, static_cast<Eigen::Index>(c)) = t->values(i, index_of(measures[c]));
    }
  }
  return fm;
}

FeatureMatrix build_feature_matrix(std::span<const LoginGraph> graphs,
                                   std::span<const Measure> measures,
                                   const MeasureOptions& options) {
  validate_measure_selection(measures);
  const std::vector<MeasureTable> tables = compute_measure_tables_serial(graphs, options);
  std::vector<const MeasureTable*> ptrs;
  ptrs.reserve(tables.size());
  for (const auto& t : tables) ptrs.push_back(&t);
  return assemble_features(ptrs, measures);
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& features) {
  out << "day,system";
  for (Measure m : features.columns) out << ",m" << index_of(m);
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < features.rows.size(); ++r) {
    out << features.rows[r].day << ',' << features.rows[r].system;
    for (Eigen::Index c = 0; c < features.values.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", features.values(static_cast<Eigen::Index>(r), c));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace lmd
