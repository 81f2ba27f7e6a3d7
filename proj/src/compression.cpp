#include "lmd/compression.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lmd/errors.hpp"
#include "lmd/random.hpp"

namespace lmd {

std::string_view to_string(CompressionKind kind) {
  return kind == CompressionKind::nmf ? "nmf" : "pca";
}

CompressionKind parse_compression(std::string_view text) {
  if (text == "nmf") return CompressionKind::nmf;
  if (text == "pca") return CompressionKind::pca;
  throw ConfigError("unknown compression '" + std::string(text) + "' (expected nmf or pca)");
}

Eigen::MatrixXd ColumnScaling::apply(const Eigen::MatrixXd& x) const {
  if (divisors.empty()) return x;
  if (static_cast<Eigen::Index>(divisors.size()) != x.cols())
    throw std::invalid_argument("column scaling does not match matrix width");
  Eigen::MatrixXd out = x;
  for (Eigen::Index c = 0; c < x.cols(); ++c) out.col(c) /= divisors[static_cast<std::size_t>(c)];
  return out;
}

Preprocessed preprocess(const Eigen::MatrixXd& x, CompressionKind kind,
                        const PreprocessOptions& options) {
  if (x.rows() == 0 || x.cols() == 0) throw std::invalid_argument("preprocess: empty matrix");
  Preprocessed out;
  out.scaling.divisors.assign(static_cast<std::size_t>(x.cols()), 1.0);
  if (kind == CompressionKind::nmf && options.nmf_max_scaling) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double mx = x.col(c).maxCoeff();
      if (mx > 0.0) out.scaling.divisors[static_cast<std::size_t>(c)] = mx;
    }
  } else if (kind == CompressionKind::pca && options.pca_standardize) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double mean = x.col(c).mean();
      const double var = (x.col(c).array() - mean).square().mean();
      if (var > 0.0) out.scaling.divisors[static_cast<std::size_t>(c)] = std::sqrt(var);
    }
  }
  out.matrix = out.scaling.apply(x);
  return out;
}

namespace {

double frobenius_residual(const Eigen::MatrixXd& x, const Eigen::MatrixXd& g,
                          const Eigen::MatrixXd& f) {
  return (x - g * f).squaredNorm();
}

// Non-negative double SVD initialisation: each singular pair contributes the
// dominant sign-part of its vectors.
void nndsvd_init(const Eigen::MatrixXd& x, int r, std::uint64_t seed, Eigen::MatrixXd& g,
                 Eigen::MatrixXd& f) {
  const Eigen::Index n = x.rows(), p = x.cols();
  g = Eigen::MatrixXd::Zero(n, r);
  f = Eigen::MatrixXd::Zero(r, p);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();

  Rng rng(seed);
  const double fill = std::sqrt(std::max(x.mean(), 1e-12) / r);
  for (int j = 0; j < r; ++j) {
    const double s = j < sigma.size() ? sigma(j) : 0.0;
    bool filled = false;
    if (s > 0.0) {
      const Eigen::VectorXd u = svd.matrixU().col(j);
      const Eigen::VectorXd v = svd.matrixV().col(j);
      const Eigen::VectorXd up = u.cwiseMax(0.0), un = (-u).cwiseMax(0.0);
      const Eigen::VectorXd vp = v.cwiseMax(0.0), vn = (-v).cwiseMax(0.0);
      const double mp = up.norm() * vp.norm();
      const double mn = un.norm() * vn.norm();
      const bool positive = mp >= mn;
      const double m = positive ? mp : mn;
      if (m > 0.0) {
        const double scale = std::sqrt(s * m);
        const Eigen::VectorXd& uu = positive ? up : un;
        const Eigen::VectorXd& vv = positive ? vp : vn;
        g.col(j) = scale * uu / uu.norm();
        f.row(j) = (scale * vv / vv.norm()).transpose();
        filled = true;
      }
    }
    if (!filled) {
      // Degenerate pair: seeded positive fill.
      for (Eigen::Index i = 0; i < n; ++i) g(i, j) = fill * (0.5 + rng.uniform01());
      for (Eigen::Index c = 0; c < p; ++c) f(j, c) = fill * (0.5 + rng.uniform01());
    }
  }
}

}  // namespace

NmfModel fit_nmf(const Eigen::MatrixXd& x, int roles, std::uint64_t seed,
                 const NmfOptions& options) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (n == 0 || p == 0) throw std::invalid_argument("fit_nmf: empty matrix");
  if (roles < 1 || roles > std::min(n, p))
    throw std::invalid_argument("fit_nmf: roles must be in [1, min(n, p)], got " +
                                std::to_string(roles));
  if ((x.array() < 0.0).any()) throw std::invalid_argument("fit_nmf: matrix has negative entries");
  if (!x.allFinite()) throw std::invalid_argument("fit_nmf: matrix has non-finite entries");

  NmfModel model;
  model.roles = roles;
  nndsvd_init(x, roles, seed, model.g, model.f);
  Eigen::MatrixXd& g = model.g;
  Eigen::MatrixXd& f = model.f;

  double prev = frobenius_residual(x, g, f);
  model.objective_history.push_back(prev);
  // Below this the fit is exact and further sweeps only move rounding noise.
  const double exact_fit = 1e-24 * x.squaredNorm();

  for (int sweep = 0; sweep < options.max_sweeps && prev > exact_fit; ++sweep) {
    // G entries, row by row.
    const Eigen::MatrixXd fft = f * f.transpose();
    const Eigen::MatrixXd xft = x * f.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int k = 0; k < roles; ++k) {
        const double curv = fft(k, k);
        if (curv <= 0.0) continue;
        double grad = xft(i, k);
        for (int l = 0; l < roles; ++l) grad -= g(i, l) * fft(l, k);
        g(i, k) = std::max(0.0, g(i, k) + grad / curv);
      }
    }
    // F entries, column by column.
    const Eigen::MatrixXd gtg = g.transpose() * g;
    const Eigen::MatrixXd gtx = g.transpose() * x;
    for (Eigen::Index c = 0; c < p; ++c) {
      for (int k = 0; k < roles; ++k) {
        const double curv = gtg(k, k);
        if (curv <= 0.0) continue;
        double grad = gtx(k, c);
        for (int l = 0; l < roles; ++l) grad -= gtg(k, l) * f(l, c);
        f(k, c) = std::max(0.0, f(k, c) + grad / curv);
      }
    }
    const double obj = frobenius_residual(x, g, f);
    model.objective_history.push_back(obj);
    if (prev - obj < options.tol * prev) break;
    prev = obj;
  }
  return model;
}

Eigen::VectorXd nmf_errors(const Eigen::MatrixXd& x, const NmfModel& model) {
  if (x.cols() != model.f.cols() || x.rows() != model.g.rows())
    throw std::invalid_argument("nmf_errors: matrix shape does not match the fitted model");
  return (x - model.g * model.f).rowwise().squaredNorm();
}

PcaModel fit_pca(const Eigen::MatrixXd& x, int roles) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (n < 2) throw std::invalid_argument("fit_pca: need at least two rows");
  if (roles < 1 || roles > p)
    throw std::invalid_argument("fit_pca: roles must be in [1, p], got " + std::to_string(roles));

  PcaModel model;
  model.roles = roles;
  model.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd scatter = centered.transpose() * centered;

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scatter);
  if (eig.info() != Eigen::Success) throw std::runtime_error("fit_pca: eigensolver failed");
  // Ascending from Eigen; reverse to descending.
  const Eigen::VectorXd values = eig.eigenvalues().reverse().cwiseMax(0.0);
  const Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();

  model.components = vectors.leftCols(roles);
  for (int c = 0; c < roles; ++c) {
    Eigen::Index arg = 0;
    model.components.col(c).cwiseAbs().maxCoeff(&arg);
    if (model.components(arg, c) < 0.0) model.components.col(c) *= -1.0;
  }
  model.eigenvalues = values.head(roles);
  model.discarded_eigenvalues = values.tail(p - roles);
  return model;
}

Eigen::VectorXd pca_errors(const Eigen::MatrixXd& x, const PcaModel& model) {
  if (x.cols() != model.mean.size())
    throw std::invalid_argument("pca_errors: matrix width does not match the fitted model");
  const Eigen::MatrixXd centered = x.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd residual =
      centered - centered * model.components * model.components.transpose();
  return residual.rowwise().squaredNorm();
}

double outlier_threshold(std::span<const double> errors, double alpha) {
  if (errors.empty()) throw std::invalid_argument("outlier_threshold: no errors");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
  std::vector<double> sorted(errors.begin(), errors.end());
  const std::size_t n = sorted.size();
  // ceil((1 - alpha) n) == n - floor(alpha n); the epsilon absorbs
  // representation error in products like 0.05 * 100.
  const auto above = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n) + 1e-9));
  const std::size_t rank = n - std::min(above, n - 1);
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   sorted.end());
  return sorted[rank - 1];
}

ReconstructionReport flag_outliers(const std::map<VertexKey, double>& errors, double alpha) {
  std::vector<double> values;
  values.reserve(errors.size());
  for (const auto& [key, e] : errors) values.push_back(e);

  ReconstructionReport report;
  report.alpha = alpha;
  report.errors = errors;
  report.threshold = outlier_threshold(values, alpha);
  for (const auto& [key, e] : errors)
    if (e > report.threshold) report.outliers.insert(key);
  return report;
}

}  // namespace lmd
