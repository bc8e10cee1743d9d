#pragma once

// Measurement-error-corrected scalar-on-function regression in score space:
//
//   Y_i  = alpha0 + beta_z' Z_i + gamma' X_i + eps_i
//   W_i  = X_i + U_i          (error-prone scores)
//   M_i  = X_i + Omega_i      (delta-scaled instrument scores)
//
// eps, U and Omega follow truncated DP mixtures of normals and the latent
// scores X an unconstrained one. The eps and U mixtures are held at mean zero;
// Omega's mean is left to absorb any residual instrument scaling bias. gamma
// carries a second-order difference smoothing prior with variance tau.

#include "sofri/fda.hpp"
#include "sofri/mixture.hpp"
#include "sofri/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace sofri {

struct ModelInputs {
  Eigen::VectorXd y;
  Eigen::MatrixXd z;         // n x p, p may be 0
  Eigen::MatrixXd w_scores;  // n x K
  Eigen::MatrixXd m_scores;  // n x K, from the delta-scaled instrument
  BasisSystem basis;

  Eigen::Index n_obs() const { return y.size(); }
  Eigen::Index n_covariates() const { return z.cols(); }
  /// Throws DimensionMismatch, DomainError, RankDeficientZ.
  void validate() const;
};

struct MixtureSettings {
  int components = 5;
  double concentration = 1.0;
};

/// NIW hyperparameters for one vector block. mu0 = 0, nu0 = K + dof_offset,
/// Psi0 = scale * I with scale <= 0 meaning "empirical score variance".
struct MvPriorSettings {
  double kappa0 = 0.01;
  double dof_offset = 2.0;
  double scale = 0.0;
};

struct McmcConfig {
  int n_iter = 2000;
  int burn_in = 500;
  int thin = 1;
  std::uint64_t seed = 1;
  int n_chains = 1;

  MixtureSettings eps;
  MixtureSettings u;
  MixtureSettings omega;
  MixtureSettings x;

  NigParams eps_prior{0.0, 0.01, 1.0, 1.0};
  MvPriorSettings u_prior;
  MvPriorSettings omega_prior;
  MvPriorSettings x_prior;

  double tau_shape = 1.0;
  double tau_scale = 0.005;

  /// Latent-score snapshots are kept every snapshot_factor retained draws (0: never).
  int snapshot_factor = 10;
  bool keep_allocations = true;

  /// Throws InvalidConfig.
  void validate() const;
  int draws_per_chain() const { return (n_iter - burn_in) / thin; }
};

struct McmcState {
  double alpha0 = 0.0;
  Eigen::VectorXd beta_z;
  Eigen::VectorXd gamma;
  double tau = 1.0;
  Eigen::MatrixXd latent;  // n x K

  ScalarMixtureBlock eps;
  MvMixtureBlock u;
  MvMixtureBlock omega;
  MvMixtureBlock x;

  /// Throws NumericalFailure when an invariant is broken.
  void check() const;
};

enum class FitMode {
  Corrected,  // full measurement-error model
  Naive,      // latent scores clamped to the W scores
};

struct Draw {
  int chain = 0;
  int iteration = 0;
  double alpha0 = 0.0;
  Eigen::VectorXd beta_z;
  Eigen::VectorXd gamma;
  double tau = 0.0;
  std::vector<int> x_allocations;
};

struct LatentSnapshot {
  int chain = 0;
  int iteration = 0;
  Eigen::MatrixXd scores;
};

struct PosteriorDraws {
  int n_obs = 0;
  int n_basis = 0;
  int n_covariates = 0;
  int x_components = 0;
  std::vector<Draw> draws;
  std::vector<LatentSnapshot> snapshots;

  std::size_t draw_count() const { return draws.size(); }
  Eigen::VectorXd mean_gamma() const;
};

/// Starting latent scores: precision-weighted average of the W and M scores
/// under moment estimates of the two error covariances (the plain average
/// when those estimates coincide, the W scores when W == M).
Eigen::MatrixXd initial_latent_scores(const Eigen::MatrixXd& w_scores,
                                      const Eigen::MatrixXd& m_scores);

McmcState initialize(const ModelInputs& inputs, const McmcConfig& config, Rng& rng,
                     FitMode mode = FitMode::Corrected);

// Individual Gibbs steps, in sweep order.
void update_error_mixture(McmcState& state, const ModelInputs& inputs, Rng& rng);
/// Updates the U and Omega blocks, then shifts (X, U, Omega, x-block means,
/// alpha0) jointly so the U mixture has mean zero; the likelihood is unchanged.
void update_measurement_mixtures(McmcState& state, const ModelInputs& inputs, Rng& rng);
void update_latent_mixture(McmcState& state, Rng& rng);
void update_latent_scores(McmcState& state, const ModelInputs& inputs, Rng& rng);
void update_regression(McmcState& state, const ModelInputs& inputs, Rng& rng);
void update_smoothing(McmcState& state, const ModelInputs& inputs, const McmcConfig& config,
                      Rng& rng);

/// Residuals Y - alpha0 - Z beta_z - X gamma under the current state.
Eigen::VectorXd response_residuals(const McmcState& state, const ModelInputs& inputs);

/// One full sweep. Throws NumericalFailure.
void sweep(McmcState& state, const ModelInputs& inputs, const McmcConfig& config, Rng& rng,
           FitMode mode = FitMode::Corrected);

/// Sequential chain; deterministic given the generator state.
PosteriorDraws run_chain(const ModelInputs& inputs, const McmcConfig& config, Rng& rng,
                         FitMode mode = FitMode::Corrected, int chain_index = 0);

/// n_chains chains in parallel, chain c seeded by Rng(config.seed).derive(c).
PosteriorDraws run_chains(const ModelInputs& inputs, const McmcConfig& config,
                          FitMode mode = FitMode::Corrected);

PosteriorDraws fit_naive(const ModelInputs& inputs, const McmcConfig& config, Rng& rng);

}  // namespace sofri
