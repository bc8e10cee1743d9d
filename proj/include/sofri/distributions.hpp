#pragma once

// Random draws and conjugate posterior parameters shared by the samplers.

#include "sofri/rng.hpp"

#include <Eigen/Dense>

#include <span>

namespace sofri {

/// Throws NonPositiveConcentration.
Eigen::VectorXd sample_dirichlet(Rng& rng, const Eigen::VectorXd& concentration);

/// Bartlett construction. Throws InvalidDegreesOfFreedom, NonSpdScale.
Eigen::MatrixXd sample_inverse_wishart(Rng& rng, double dof, const Eigen::MatrixXd& scale);

/// Draw from N(Q^{-1} b, Q^{-1}) given the Cholesky factor of the precision Q.
Eigen::VectorXd sample_mvn_canonical(Rng& rng, const Eigen::LLT<Eigen::MatrixXd>& precision,
                                     const Eigen::VectorXd& linear);

/// Draw from N(mean, L L^T) given the lower Cholesky factor of the covariance.
Eigen::VectorXd sample_mvn_cholesky(Rng& rng, const Eigen::VectorXd& mean,
                                    const Eigen::MatrixXd& lower);

/// Index drawn with probability proportional to exp(log_weights[k]).
/// `probabilities` receives the normalized weights.
int sample_categorical_log(Rng& rng, std::span<const double> log_weights,
                           std::span<double> probabilities);

/// Normal-inverse-gamma: sigma2 ~ IG(shape, rate), mu | sigma2 ~ N(mean, sigma2 / kappa).
struct NigParams {
  double mean = 0.0;
  double kappa = 0.01;
  double shape = 1.0;
  double rate = 1.0;
};

/// Posterior after observing `data`.
NigParams nig_posterior(const NigParams& prior, std::span<const double> data);

/// Normal-inverse-Wishart: Sigma ~ IW(dof, scale), mu | Sigma ~ N(mean, Sigma / kappa).
struct NiwParams {
  Eigen::VectorXd mean;
  double kappa = 0.01;
  double dof = 0.0;
  Eigen::MatrixXd scale;
};

/// Posterior from sufficient statistics: count, sample mean, centered scatter.
NiwParams niw_posterior(const NiwParams& prior, double count, const Eigen::VectorXd& sample_mean,
                        const Eigen::MatrixXd& scatter);

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double log_normal_density(double x, double mean, double variance);

}  // namespace sofri
