#include "lmd/baseline.hpp"

#include <cmath>
#include <stdexcept>

#include <omp.h>

namespace lmd {

GraphSummary summarize_table(const std::string& user, const MeasureTable& table) {
  GraphSummary out;
  out.user = user;
  out.day = table.day;
  const Eigen::Index n = table.values.rows();
  if (n == 0) throw std::invalid_argument("summarize_graph: empty graph");
  for (std::size_t m = 0; m < kMeasureCount; ++m) {
    const auto col = table.values.col(static_cast<Eigen::Index>(m));
    const double mean = col.sum() / static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = col(i) - mean;
      m2 += d * d;
      m3 += d * d * d;
      m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    // Spread at rounding level (e.g. Katz scores of symmetric vertices) is
    // treated as none; its skewness and kurtosis would be pure noise.
    const double scale = col.cwiseAbs().maxCoeff();
    if (std::sqrt(m2) <= kSpreadFloor * scale) m2 = m3 = m4 = 0.0;
    double skew = 0.0, kurt = 0.0;
    if (m2 > 0.0) {
      skew = m3 / std::pow(m2, 1.5);
      kurt = m4 / (m2 * m2);
    }
    out.vector[4 * m + 0] = mean;
    out.vector[4 * m + 1] = m2;
    out.vector[4 * m + 2] = skew;
    out.vector[4 * m + 3] = kurt;
  }
  return out;
}

GraphSummary summarize_graph(const LoginGraph& graph, const MeasureOptions& options) {
  if (graph.vertex_count() == 0) throw std::invalid_argument("summarize_graph: empty graph");
  return summarize_table(graph.user(), compute_measure_table(graph, options));
}

double canberra(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("canberra: length mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double den = x[i] + y[i];
    if (den == 0.0) continue;
    d += std::abs(x[i] - y[i]) / den;
  }
  return d;
}

namespace {

void fill_row(std::span<const GraphSummary> s, Eigen::MatrixXd& d, std::size_t i) {
  for (std::size_t j = 0; j < s.size(); ++j) {
    // Evaluate each unordered pair in one fixed argument order so the
    // matrix is exactly symmetric.
    const auto& a = i < j ? s[i] : s[j];
    const auto& b = i < j ? s[j] : s[i];
    d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        i == j ? 0.0 : canberra(a.vector, b.vector);
  }
}

}  // namespace

Eigen::MatrixXd distance_matrix_serial(std::span<const GraphSummary> summaries) {
  const auto n = static_cast<Eigen::Index>(summaries.size());
  Eigen::MatrixXd d(n, n);
  for (std::size_t i = 0; i < summaries.size(); ++i) fill_row(summaries, d, i);
  return d;
}

Eigen::MatrixXd distance_matrix(std::span<const GraphSummary> summaries, int workers) {
  const auto n = static_cast<Eigen::Index>(summaries.size());
  Eigen::MatrixXd d(n, n);
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
  for (Eigen::Index i = 0; i < n; ++i) fill_row(summaries, d, static_cast<std::size_t>(i));
  return d;
}

BaselineReport baseline_report(const LoginHistory& history, double threshold,
                               const MeasureOptions& options, int workers) {
  if (history.size() < 3) throw std::invalid_argument("baseline needs at least 3 graphs");
  const auto tables = compute_measure_tables(history.graphs(), options, workers);
  std::vector<GraphSummary> summaries;
  summaries.reserve(tables.size());
  for (const auto& t : tables) summaries.push_back(summarize_table(history.user(), t));

  BaselineReport report;
  report.user = history.user();
  report.threshold = threshold;
  report.distances = distance_matrix(summaries, workers);
  const auto n = report.distances.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mean = report.distances.row(i).sum() / static_cast<double>(n - 1);
    report.days.push_back(summaries[static_cast<std::size_t>(i)].day);
    report.mean_distance.push_back(mean);
    if (mean > threshold) report.flagged.insert(report.days.back());
  }
  return report;
}

std::set<DayIndex> distance_outliers(const LoginHistory& history, double threshold,
                                     const MeasureOptions& options) {
  return baseline_report(history, threshold, options).flagged;
}

}  // namespace lmd
