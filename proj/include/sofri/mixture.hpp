#pragma once

// Truncated Dirichlet-process mixtures of normals used for the regression
// error, the two measurement-error processes and the latent scores.
//
// One Gibbs sweep of a block runs four steps in order:
//   allocations -> component parameters -> weights -> (optional) recentering.
// Recentering shifts every component mean by -sum_k pi_k mu_k so the mixture
// has mean zero; the shift is returned so the caller can absorb it elsewhere.

#include "sofri/distributions.hpp"
#include "sofri/rng.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace sofri {

struct ScalarMixtureBlock {
  Eigen::VectorXd weights;
  Eigen::VectorXd means;
  Eigen::VectorXd variances;
  std::vector<int> allocations;  // 0-based component index per observation
  double concentration = 1.0;
  NigParams prior;

  int n_components() const { return static_cast<int>(weights.size()); }
  /// Throws NumericalFailure when weights or variances are invalid.
  void check() const;
};

/// Component parameters with cached factorizations.
struct MvComponent {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd chol;       // lower Cholesky factor of cov
  Eigen::MatrixXd precision;  // cov^{-1}
  double log_det = 0.0;       // log |cov|

  /// Throws NumericalFailure when `cov` is not SPD.
  void set_cov(Eigen::MatrixXd cov_in);
};

struct MvMixtureBlock {
  Eigen::VectorXd weights;
  std::vector<MvComponent> components;
  std::vector<int> allocations;
  double concentration = 1.0;
  NiwParams prior;

  int n_components() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(prior.mean.size()); }
  void check() const;
};

/// Block with equal weights, every component at the prior location/scale and
/// all observations on component 0.
ScalarMixtureBlock make_scalar_block(int n_components, double concentration,
                                     const NigParams& prior, std::size_t n_obs);
MvMixtureBlock make_mv_block(int n_components, double concentration, const NiwParams& prior,
                             std::size_t n_obs);

/// Normalized allocation probabilities for one observation.
void allocation_probabilities(const ScalarMixtureBlock& block, double value,
                              std::span<double> out);

void update_allocations(ScalarMixtureBlock& block, std::span<const double> residuals, Rng& rng);
void update_components(ScalarMixtureBlock& block, std::span<const double> residuals, Rng& rng);
void update_weights(ScalarMixtureBlock& block, Rng& rng);
/// Returns the shift s = sum_k pi_k mu_k that was subtracted from each mean.
double recenter(ScalarMixtureBlock& block);

/// Full sweep; returns the recentering shift (0 when not enforced).
/// Throws EmptyResiduals, DimensionMismatch.
double gibbs_update_scalar_mixture(ScalarMixtureBlock& block, std::span<const double> residuals,
                                   Rng& rng, bool enforce_zero_mean = true);

/// Per-observation log pi_k + log N(r_i | mu_k, Sigma_k), n x K_comp.
Eigen::MatrixXd component_log_likelihoods(const MvMixtureBlock& block,
                                          const Eigen::MatrixXd& residuals);
void update_allocations(MvMixtureBlock& block, const Eigen::MatrixXd& residuals, Rng& rng);
void update_components(MvMixtureBlock& block, const Eigen::MatrixXd& residuals, Rng& rng);
void update_weights(MvMixtureBlock& block, Rng& rng);
Eigen::VectorXd recenter(MvMixtureBlock& block);

/// Rows of `residuals` are observations. Throws DimensionMismatch, EmptyResiduals.
Eigen::VectorXd gibbs_update_mv_mixture(MvMixtureBlock& block, const Eigen::MatrixXd& residuals,
                                        Rng& rng, bool enforce_zero_mean);

/// Draw (mu, sigma2) / (mu, Sigma) from the conjugate prior.
void draw_from_prior(ScalarMixtureBlock& block, int component, Rng& rng);
void draw_from_prior(MvMixtureBlock& block, int component, Rng& rng);

double log_density_mixture(const ScalarMixtureBlock& block, double value);
double log_density_mixture(const MvMixtureBlock& block, const Eigen::VectorXd& value);

/// Counts per component from the allocation vector.
std::vector<int> component_counts(std::span<const int> allocations, int n_components);

}  // namespace sofri
