#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lmd/login_graph.hpp"

namespace lmd {

enum class CompressionKind { nmf, pca };

std::string_view to_string(CompressionKind kind);
// Throws ConfigError for anything other than "nmf" / "pca".
CompressionKind parse_compression(std::string_view text);

// Per-column divisors applied before fitting; 1.0 leaves a column untouched.
struct ColumnScaling {
  std::vector<double> divisors;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  bool operator==(const ColumnScaling&) const = default;
};

struct PreprocessOptions {
  bool nmf_max_scaling = true;
  bool pca_standardize = false;
};

struct Preprocessed {
  Eigen::MatrixXd matrix;
  ColumnScaling scaling;
};

// nmf: divide each column by its maximum when that maximum is > 0.
// pca: pass-through (or divide by the population standard deviation when
// pca_standardize is set; zero-variance columns are untouched).
Preprocessed preprocess(const Eigen::MatrixXd& x, CompressionKind kind,
                        const PreprocessOptions& options = {});

struct NmfOptions {
  int max_sweeps = 200;
  double tol = 1e-6;
};

struct NmfModel {
  int roles = 1;
  Eigen::MatrixXd g;  // n x r, non-negative
  Eigen::MatrixXd f;  // r x p, non-negative
  ColumnScaling scaling;
  // ||X - GF||_F^2 after initialisation and after every sweep.
  std::vector<double> objective_history;

  double objective() const { return objective_history.empty() ? 0.0 : objective_history.back(); }
};

// Non-negative factorisation X ~ G F by cyclic coordinate descent over the
// entries of G then F, initialised from the non-negative parts of the
// leading singular vectors. Stops when the relative objective decrease drops
// below tol, once the fit is exact to rounding, or after max_sweeps. Throws
// std::invalid_argument for negative entries or r outside [1, min(n, p)].
NmfModel fit_nmf(const Eigen::MatrixXd& x, int roles, std::uint64_t seed,
                 const NmfOptions& options = {});

// Row-wise squared reconstruction error sum_j (X - GF)_ij^2.
Eigen::VectorXd nmf_errors(const Eigen::MatrixXd& x, const NmfModel& model);

struct PcaModel {
  int roles = 1;
  Eigen::VectorXd mean;            // p
  Eigen::MatrixXd components;      // p x r, orthonormal columns
  Eigen::VectorXd eigenvalues;     // r, descending
  Eigen::VectorXd discarded_eigenvalues;  // p - r, descending
  ColumnScaling scaling;
};

// Eigen-decomposition of the unnormalised scatter matrix
// sum_s (f_s - mean)(f_s - mean)^T. Each component's largest-magnitude entry
// is made positive. Throws std::invalid_argument when n < 2 or r not in [1, p].
PcaModel fit_pca(const Eigen::MatrixXd& x, int roles);

// Squared distance between each row and (row - mean) C C^T + mean.
Eigen::VectorXd pca_errors(const Eigen::MatrixXd& x, const PcaModel& model);

// Nearest-rank (1 - alpha) quantile of the errors.
double outlier_threshold(std::span<const double> errors, double alpha);

struct ReconstructionReport {
  std::map<VertexKey, double> errors;
  double threshold = 0.0;
  std::set<VertexKey> outliers;
  double alpha = 0.05;
};

// Outliers are the keys whose error is strictly above the threshold, so at
// most floor(alpha * n) keys are flagged and ties never are.
ReconstructionReport flag_outliers(const std::map<VertexKey, double>& errors, double alpha);

}  // namespace lmd
