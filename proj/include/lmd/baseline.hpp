#pragma once

#include <array>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lmd/login_graph.hpp"
#include "lmd/measures.hpp"

namespace lmd {

inline constexpr std::size_t kSummaryLength = 4 * kMeasureCount;

// Relative standard deviation below which a column counts as constant.
inline constexpr double kSpreadFloor = 1e-12;

// Mean, population variance, skewness and kurtosis of every measure over the
// graph's vertices, measure-major. A constant column (standard deviation at
// most kSpreadFloor times its largest magnitude) has variance, skewness and
// kurtosis 0.
struct GraphSummary {
  std::string user;
  DayIndex day = 0;
  std::array<double, kSummaryLength> vector{};
};

GraphSummary summarize_graph(const LoginGraph& graph, const MeasureOptions& options = {});
GraphSummary summarize_table(const std::string& user, const MeasureTable& table);

// Sum of |x_i - y_i| / (x_i + y_i); terms with a zero denominator contribute
// 0. Throws std::invalid_argument on a length mismatch.
double canberra(std::span<const double> x, std::span<const double> y);

// Symmetric, zero diagonal. Rows are computed in parallel.
Eigen::MatrixXd distance_matrix(std::span<const GraphSummary> summaries, int workers = 0);
Eigen::MatrixXd distance_matrix_serial(std::span<const GraphSummary> summaries);

struct BaselineReport {
  std::string user;
  std::vector<DayIndex> days;
  Eigen::MatrixXd distances;
  std::vector<double> mean_distance;  // to all other graphs
  double threshold = 0.0;
  std::set<DayIndex> flagged;
};

// Throws std::invalid_argument for fewer than 3 graphs.
BaselineReport baseline_report(const LoginHistory& history, double threshold,
                               const MeasureOptions& options = {}, int workers = 0);

// Days whose mean distance to every other graph exceeds `threshold`.
std::set<DayIndex> distance_outliers(const LoginHistory& history, double threshold,
                                     const MeasureOptions& options = {});

}  // namespace lmd
