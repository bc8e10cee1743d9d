#include "sofri/mixture.hpp"

#include "sofri/error.hpp"

#include <cmath>
#include <limits>

namespace sofri {

void ScalarMixtureBlock::check() const {
  const Eigen::Index k = weights.size();
  if (k == 0 || means.size() != k || variances.size() != k) {
    throw Error(ErrorCode::DimensionMismatch, "scalar mixture block has inconsistent sizes");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-9 || (weights.array() < 0.0).any()) {
    throw Error(ErrorCode::NumericalFailure, "scalar mixture weights are not a simplex");
  }
  if (!(variances.array() > 0.0).all() || !variances.allFinite() || !means.allFinite()) {
    throw Error(ErrorCode::NumericalFailure, "scalar mixture has invalid component parameters");
  }
}

void MvComponent::set_cov(Eigen::MatrixXd cov_in) {
  cov = 0.5 * (cov_in + cov_in.transpose());
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success || !cov.allFinite()) {
    throw Error(ErrorCode::NumericalFailure, "mixture component covariance is not SPD");
  }
  chol = llt.matrixL();
  precision = llt.solve(Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
  precision = 0.5 * (precision + precision.transpose());
  log_det = 2.0 * chol.diagonal().array().log().sum();
}

void MvMixtureBlock::check() const {
  const Eigen::Index k = weights.size();
  if (k == 0 || static_cast<Eigen::Index>(components.size()) != k) {
    throw Error(ErrorCode::DimensionMismatch, "mv mixture block has inconsistent sizes");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-9 || (weights.array() < 0.0).any()) {
    throw Error(ErrorCode::NumericalFailure, "mv mixture weights are not a simplex");
  }
  if (!(prior.dof > dim() - 1)) {
    throw Error(ErrorCode::InvalidDegreesOfFreedom, "NIW prior needs dof > dim - 1");
  }
  for (const auto& c : components) {
    if (c.mean.size() != dim() || c.cov.rows() != dim() || !c.mean.allFinite()) {
      throw Error(ErrorCode::NumericalFailure, "mv mixture component is malformed");
    }
  }
}

ScalarMixtureBlock make_scalar_block(int n_components, double concentration,
                                     const NigParams& prior, std::size_t n_obs) {
  if (n_components < 1) {
    throw Error(ErrorCode::InvalidConfig, "mixture needs at least one component");
  }
  if (!(concentration > 0.0)) {
    throw Error(ErrorCode::NonPositiveConcentration, "mixture concentration must be positive");
  }
  ScalarMixtureBlock block;
  block.weights = Eigen::VectorXd::Constant(n_components, 1.0 / n_components);
  block.means = Eigen::VectorXd::Constant(n_components, prior.mean);
  block.variances =
      Eigen::VectorXd::Constant(n_components, prior.rate / std::max(prior.shape - 1.0, 1.0));
  block.allocations.assign(n_obs, 0);
  block.concentration = concentration;
  block.prior = prior;
  return block;
}

MvMixtureBlock make_mv_block(int n_components, double concentration, const NiwParams& prior,
                             std::size_t n_obs) {
  if (n_components < 1) {
    throw Error(ErrorCode::InvalidConfig, "mixture needs at least one component");
  }
  if (!(concentration > 0.0)) {
    throw Error(ErrorCode::NonPositiveConcentration, "mixture concentration must be positive");
  }
  const auto dim = static_cast<double>(prior.mean.size());
  if (!(prior.dof > dim - 1.0)) {
    throw Error(ErrorCode::InvalidDegreesOfFreedom, "NIW prior needs dof > dim - 1");
  }
  MvMixtureBlock block;
  block.weights = Eigen::VectorXd::Constant(n_components, 1.0 / n_components);
  block.components.resize(static_cast<std::size_t>(n_components));
  const double denom = std::max(prior.dof - dim - 1.0, 1.0);
  for (auto& c : block.components) {
    c.mean = prior.mean;
    c.set_cov(prior.scale / denom);
  }
  block.allocations.assign(n_obs, 0);
  block.concentration = concentration;
  block.prior = prior;
  return block;
}

std::vector<int> component_counts(std::span<const int> allocations, int n_components) {
  std::vector<int> counts(static_cast<std::size_t>(n_components), 0);
  for (const int z : allocations) ++counts[static_cast<std::size_t>(z)];
  return counts;
}

// ---------------------------------------------------------------- scalar block

void allocation_probabilities(const ScalarMixtureBlock& block, double value,
                              std::span<double> out) {
  const int k_comp = block.n_components();
  double top = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < k_comp; ++k) {
    out[k] = block.weights[k] > 0.0
                 ? std::log(block.weights[k]) +
                       log_normal_density(value, block.means[k], block.variances[k])
                 : -std::numeric_limits<double>::infinity();
    top = std::max(top, out[k]);
  }
  double total = 0.0;
  for (int k = 0; k < k_comp; ++k) {
    out[k] = std::isfinite(out[k]) ? std::exp(out[k] - top) : 0.0;
    total += out[k];
  }
  for (int k = 0; k < k_comp; ++k) out[k] /= total;
}

void update_allocations(ScalarMixtureBlock& block, std::span<const double> residuals, Rng& rng) {
  const int k_comp = block.n_components();
  block.allocations.resize(residuals.size());
  if (k_comp == 1) {
    std::fill(block.allocations.begin(), block.allocations.end(), 0);
    return;
  }
  std::vector<double> log_w(static_cast<std::size_t>(k_comp));
  std::vector<double> probs(static_cast<std::size_t>(k_comp));
  std::vector<double> log_pi(static_cast<std::size_t>(k_comp));
  std::vector<double> log_sd(static_cast<std::size_t>(k_comp));
  for (int k = 0; k < k_comp; ++k) {
    log_pi[k] = block.weights[k] > 0.0 ? std::log(block.weights[k])
                                       : -std::numeric_limits<double>::infinity();
    log_sd[k] = 0.5 * std::log(block.variances[k]);
  }
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    for (int k = 0; k < k_comp; ++k) {
      const double d = residuals[i] - block.means[k];
      log_w[k] = log_pi[k] - log_sd[k] - 0.5 * d * d / block.variances[k];
    }
    block.allocations[i] = sample_categorical_log(rng, log_w, probs);
  }
}

void draw_from_prior(ScalarMixtureBlock& block, int component, Rng& rng) {
  const NigParams& p = block.prior;
  const double var = rng.inverse_gamma(p.shape, p.rate);
  block.variances[component] = var;
  block.means[component] = p.mean + std::sqrt(var / p.kappa) * rng.normal();
}

void update_components(ScalarMixtureBlock& block, std::span<const double> residuals, Rng& rng) {
  const int k_comp = block.n_components();
  std::vector<std::vector<double>> members(static_cast<std::size_t>(k_comp));
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    members[static_cast<std::size_t>(block.allocations[i])].push_back(residuals[i]);
  }
  for (int k = 0; k < k_comp; ++k) {
    const NigParams post = nig_posterior(block.prior, members[static_cast<std::size_t>(k)]);
    const double var = rng.inverse_gamma(post.shape, post.rate);
    block.variances[k] = var;
    block.means[k] = post.mean + std::sqrt(var / post.kappa) * rng.normal();
  }
}

void update_weights(ScalarMixtureBlock& block, Rng& rng) {
  const int k_comp = block.n_components();
  const auto counts = component_counts(block.allocations, k_comp);
  Eigen::VectorXd conc(k_comp);
  for (int k = 0; k < k_comp; ++k) conc[k] = block.concentration / k_comp + counts[k];
  block.weights = sample_dirichlet(rng, conc);
}

double recenter(ScalarMixtureBlock& block) {
  const double shift = block.weights.dot(block.means);
  block.means.array() -= shift;
  return shift;
}

double gibbs_update_scalar_mixture(ScalarMixtureBlock& block, std::span<const double> residuals,
                                   Rng& rng, bool enforce_zero_mean) {
  if (residuals.empty()) {
    throw Error(ErrorCode::EmptyResiduals, "scalar mixture update needs residuals");
  }
  update_allocations(block, residuals, rng);
  update_components(block, residuals, rng);
  update_weights(block, rng);
  return enforce_zero_mean ? recenter(block) : 0.0;
}

double log_density_mixture(const ScalarMixtureBlock& block, double value) {
  double top = -std::numeric_limits<double>::infinity();
  const int k_comp = block.n_components();
  std::vector<double> terms(static_cast<std::size_t>(k_comp));
  for (int k = 0; k < k_comp; ++k) {
    terms[k] = block.weights[k] > 0.0
                   ? std::log(block.weights[k]) +
                         log_normal_density(value, block.means[k], block.variances[k])
                   : -std::numeric_limits<double>::infinity();
    top = std::max(top, terms[k]);
  }
  double total = 0.0;
  for (const double t : terms) total += std::isfinite(t) ? std::exp(t - top) : 0.0;
  return top + std::log(total);
}

// ---------------------------------------------------------------- mv block

namespace {

void require_dim(const MvMixtureBlock& block, const Eigen::MatrixXd& residuals) {
  if (residuals.cols() != block.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "residuals have " + std::to_string(residuals.cols()) +
                    " columns but the mixture dimension is " + std::to_string(block.dim()));
  }
}

}  // namespace

Eigen::MatrixXd component_log_likelihoods(const MvMixtureBlock& block,
                                          const Eigen::MatrixXd& residuals) {
  require_dim(block, residuals);
  const Eigen::Index n = residuals.rows();
  const int k_comp = block.n_components();
  const double log_norm = -kLogSqrt2Pi * block.dim();
  Eigen::MatrixXd out(n, k_comp);
  Eigen::MatrixXd centered(block.dim(), n);
  for (int k = 0; k < k_comp; ++k) {
    const MvComponent& c = block.components[static_cast<std::size_t>(k)];
    if (!(block.weights[k] > 0.0)) {
      out.col(k).setConstant(-std::numeric_limits<double>::infinity());
      continue;
    }
    centered = residuals.transpose().colwise() - c.mean;
    c.chol.triangularView<Eigen::Lower>().solveInPlace(centered);
    out.col(k) = (std::log(block.weights[k]) + log_norm - 0.5 * c.log_det) -
                 0.5 * centered.colwise().squaredNorm().transpose().array();
  }
  return out;
}

void update_allocations(MvMixtureBlock& block, const Eigen::MatrixXd& residuals, Rng& rng) {
  const int k_comp = block.n_components();
  const auto n = static_cast<std::size_t>(residuals.rows());
  block.allocations.resize(n);
  if (k_comp == 1) {
    require_dim(block, residuals);
    std::fill(block.allocations.begin(), block.allocations.end(), 0);
    return;
  }
  const Eigen::MatrixXd loglik = component_log_likelihoods(block, residuals);
  std::vector<double> log_w(static_cast<std::size_t>(k_comp));
  std::vector<double> probs(static_cast<std::size_t>(k_comp));
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < k_comp; ++k) log_w[k] = loglik(static_cast<Eigen::Index>(i), k);
    block.allocations[i] = sample_categorical_log(rng, log_w, probs);
  }
}

void draw_from_prior(MvMixtureBlock& block, int component, Rng& rng) {
  const NiwParams& p = block.prior;
  MvComponent& c = block.components[static_cast<std::size_t>(component)];
  c.set_cov(sample_inverse_wishart(rng, p.dof, p.scale));
  c.mean = sample_mvn_cholesky(rng, p.mean, c.chol / std::sqrt(p.kappa));
}

void update_components(MvMixtureBlock& block, const Eigen::MatrixXd& residuals, Rng& rng) {
  require_dim(block, residuals);
  const int k_comp = block.n_components();
  const int dim = block.dim();
  const auto counts = component_counts(block.allocations, k_comp);
  std::vector<Eigen::VectorXd> sums(static_cast<std::size_t>(k_comp),
                                    Eigen::VectorXd::Zero(dim));
  for (Eigen::Index i = 0; i < residuals.rows(); ++i) {
    sums[static_cast<std::size_t>(block.allocations[static_cast<std::size_t>(i)])] +=
        residuals.row(i).transpose();
  }
  std::vector<Eigen::MatrixXd> scatter(static_cast<std::size_t>(k_comp),
                                       Eigen::MatrixXd::Zero(dim, dim));
  std::vector<Eigen::VectorXd> means(static_cast<std::size_t>(k_comp));
  for (int k = 0; k < k_comp; ++k) {
    means[k] = counts[k] > 0 ? Eigen::VectorXd(sums[k] / counts[k]) : Eigen::VectorXd::Zero(dim);
  }
  Eigen::VectorXd dev(dim);
  for (Eigen::Index i = 0; i < residuals.rows(); ++i) {
    const auto k = static_cast<std::size_t>(block.allocations[static_cast<std::size_t>(i)]);
    dev = residuals.row(i).transpose() - means[k];
    scatter[k].selfadjointView<Eigen::Lower>().rankUpdate(dev);
  }
  for (int k = 0; k < k_comp; ++k) {
    if (counts[k] == 0) {
      draw_from_prior(block, k, rng);
      continue;
    }
    const Eigen::MatrixXd full = scatter[k].selfadjointView<Eigen::Lower>();
    const NiwParams post = niw_posterior(block.prior, counts[k], means[k], full);
    MvComponent& c = block.components[static_cast<std::size_t>(k)];
    c.set_cov(sample_inverse_wishart(rng, post.dof, post.scale));
    c.mean = sample_mvn_cholesky(rng, post.mean, c.chol / std::sqrt(post.kappa));
  }
}

void update_weights(MvMixtureBlock& block, Rng& rng) {
  const int k_comp = block.n_components();
  const auto counts = component_counts(block.allocations, k_comp);
  Eigen::VectorXd conc(k_comp);
  for (int k = 0; k < k_comp; ++k) conc[k] = block.concentration / k_comp + counts[k];
  block.weights = sample_dirichlet(rng, conc);
}

Eigen::VectorXd recenter(MvMixtureBlock& block) {
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(block.dim());
  for (int k = 0; k < block.n_components(); ++k) {
    shift += block.weights[k] * block.components[static_cast<std::size_t>(k)].mean;
  }
  for (auto& c : block.components) c.mean -= shift;
  return shift;
}

Eigen::VectorXd gibbs_update_mv_mixture(MvMixtureBlock& block, const Eigen::MatrixXd& residuals,
                                        Rng& rng, bool enforce_zero_mean) {
  require_dim(block, residuals);
  if (residuals.rows() == 0) {
    throw Error(ErrorCode::EmptyResiduals, "mv mixture update needs residuals");
  }
  update_allocations(block, residuals, rng);
  update_components(block, residuals, rng);
  update_weights(block, rng);
  return enforce_zero_mean ? recenter(block) : Eigen::VectorXd::Zero(block.dim());
}

double log_density_mixture(const MvMixtureBlock& block, const Eigen::VectorXd& value) {
  const Eigen::MatrixXd row = value.transpose();
  const Eigen::RowVectorXd terms = component_log_likelihoods(block, row).row(0);
  const double top = terms.maxCoeff();
  double total = 0.0;
  for (Eigen::Index k = 0; k < terms.size(); ++k) {
    total += std::isfinite(terms[k]) ? std::exp(terms[k] - top) : 0.0;
  }
  return top + std::log(total);
}

}  // namespace sofri
