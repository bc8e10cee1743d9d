#include "sofri/distributions.hpp"

#include "sofri/error.hpp"

#include <cmath>
#include <limits>

namespace sofri {

Eigen::VectorXd sample_dirichlet(Rng& rng, const Eigen::VectorXd& concentration) {
  const Eigen::Index k = concentration.size();
  if (k == 0) {
    throw Error(ErrorCode::NonPositiveConcentration, "empty concentration vector");
  }
  Eigen::VectorXd logs(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(concentration[i] > 0.0) || !std::isfinite(concentration[i])) {
      throw Error(ErrorCode::NonPositiveConcentration,
                  "Dirichlet concentration " + std::to_string(i) + " is not positive");
    }
    logs[i] = rng.log_gamma_draw(concentration[i]);
  }
  if (k == 1) return Eigen::VectorXd::Ones(1);
  const double top = logs.maxCoeff();
  Eigen::VectorXd w = (logs.array() - top).exp();
  return w / w.sum();
}

Eigen::MatrixXd sample_inverse_wishart(Rng& rng, double dof, const Eigen::MatrixXd& scale) {
  const Eigen::Index dim = scale.rows();
  if (scale.cols() != dim || dim == 0) {
    throw Error(ErrorCode::NonSpdScale, "inverse-Wishart scale must be square and non-empty");
  }
  if (!(dof > static_cast<double>(dim) - 1.0)) {
    throw Error(ErrorCode::InvalidDegreesOfFreedom,
                "inverse-Wishart needs dof > dim - 1 (dof=" + std::to_string(dof) +
                    ", dim=" + std::to_string(dim) + ")");
  }
  const Eigen::LLT<Eigen::MatrixXd> chol(scale);
  if (chol.info() != Eigen::Success) {
    throw Error(ErrorCode::NonSpdScale, "inverse-Wishart scale is not positive definite");
  }
  // Sigma^{-1} = L^{-T} A A^T L^{-1} with A the Bartlett factor, so
  // Sigma = (L A^{-T}) (L A^{-T})^T.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(dof - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  // C = L A^{-T}  <=>  C A^T = L  <=>  A C^T = L^T
  const Eigen::MatrixXd l = chol.matrixL();
  const Eigen::MatrixXd ct =
      a.triangularView<Eigen::Lower>().solve(l.transpose());
  Eigen::MatrixXd sigma = ct.transpose() * ct;
  return 0.5 * (sigma + sigma.transpose());
}

Eigen::VectorXd sample_mvn_canonical(Rng& rng, const Eigen::LLT<Eigen::MatrixXd>& precision,
                                     const Eigen::VectorXd& linear) {
  const Eigen::Index dim = linear.size();
  Eigen::VectorXd z(dim);
  for (Eigen::Index i = 0; i < dim; ++i) z[i] = rng.normal();
  // mean = Q^{-1} b; noise = L^{-T} z has covariance Q^{-1}
  Eigen::VectorXd mean = precision.solve(linear);
  precision.matrixU().solveInPlace(z);
  return mean + z;
}

Eigen::VectorXd sample_mvn_cholesky(Rng& rng, const Eigen::VectorXd& mean,
                                    const Eigen::MatrixXd& lower) {
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + lower.triangularView<Eigen::Lower>() * z;
}

int sample_categorical_log(Rng& rng, std::span<const double> log_weights,
                           std::span<double> probabilities) {
  double top = -std::numeric_limits<double>::infinity();
  for (const double lw : log_weights) top = std::max(top, lw);
  double total = 0.0;
  for (std::size_t k = 0; k < log_weights.size(); ++k) {
    probabilities[k] = std::isfinite(log_weights[k]) ? std::exp(log_weights[k] - top) : 0.0;
    total += probabilities[k];
  }
  for (auto& p : probabilities) p /= total;
  const double u = rng.uniform();
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    if (probabilities[k] <= 0.0) continue;
    last_positive = static_cast<int>(k);
    acc += probabilities[k];
    if (u < acc) return static_cast<int>(k);
  }
  return last_positive;
}

NigParams nig_posterior(const NigParams& prior, std::span<const double> data) {
  const auto n = static_cast<double>(data.size());
  if (data.empty()) return prior;
  double mean = 0.0;
  for (const double x : data) mean += x;
  mean /= n;
  double ss = 0.0;
  for (const double x : data) ss += (x - mean) * (x - mean);
  NigParams post;
  post.kappa = prior.kappa + n;
  post.mean = (prior.kappa * prior.mean + n * mean) / post.kappa;
  post.shape = prior.shape + 0.5 * n;
  const double dev = mean - prior.mean;
  post.rate = prior.rate + 0.5 * ss + 0.5 * prior.kappa * n * dev * dev / post.kappa;
  return post;
}

NiwParams niw_posterior(const NiwParams& prior, double count, const Eigen::VectorXd& sample_mean,
                        const Eigen::MatrixXd& scatter) {
  if (count <= 0.0) return prior;
  NiwParams post;
  post.kappa = prior.kappa + count;
  post.mean = (prior.kappa * prior.mean + count * sample_mean) / post.kappa;
  post.dof = prior.dof + count;
  const Eigen::VectorXd dev = sample_mean - prior.mean;
  post.scale = prior.scale + scatter + (prior.kappa * count / post.kappa) * dev * dev.transpose();
  post.scale = 0.5 * (post.scale + post.scale.transpose());
  return post;
}

double log_normal_density(double x, double mean, double variance) {
  const double d = x - mean;
  return -kLogSqrt2Pi - 0.5 * std::log(variance) - 0.5 * d * d / variance;
}

}  // namespace sofri
