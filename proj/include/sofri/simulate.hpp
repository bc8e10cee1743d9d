#pragma once

// Synthetic studies: Gaussian-process curves with exchangeable covariance,
// an instrument with multiplicative bias delta(t), and MSIE scoring of
// beta(t) estimators over replicates.

#include "sofri/fda.hpp"
#include "sofri/model.hpp"
#include "sofri/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace sofri {

enum class TrueBeta { Sine, Quadratic };
enum class ErrorDist { Normal, SkewMixture };

TrueBeta parse_true_beta(const std::string& name);
ErrorDist parse_error_dist(const std::string& name);
std::string to_string(TrueBeta beta);
std::string to_string(ErrorDist dist);

struct Scenario {
  int n = 500;
  int n_grid = 50;
  double sigma_x = 4.0;
  double sigma_u = 4.0;
  double sigma_omega = 1.0;
  double sigma_e = 1.0;
  double rho_x = 0.25;
  double rho_u = 0.25;
  double rho_omega = 0.25;
  double delta = 2.0;
  int n_covariates = 1;
  int n_reps = 100;
  std::uint64_t seed = 20240501;
  TrueBeta true_beta = TrueBeta::Sine;
  ErrorDist error_dist = ErrorDist::Normal;
  /// Optional mean shift per latent group: curve i gets mean
  /// sin(2 pi t) * group_sign when two_groups is set (+1 first half, -1 second).
  bool two_groups = false;

  /// Throws InvalidScenario.
  void validate() const;
};

/// (delta/2)(1 + sin(2 pi t)) + min(delta, 0.02).
double delta_function(double t, double delta);
Eigen::VectorXd true_beta_values(TrueBeta beta, const Grid& grid);

struct SimulatedDataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd z;
  FunctionalDataset w;
  FunctionalDataset m;
  FunctionalDataset x;
  Eigen::VectorXd beta_true;
  Eigen::VectorXd delta_true;
  std::vector<int> group;  // 0/1 latent group when two_groups, else all 0
};

/// Draws the replicate with generator `rng`; rep_index only labels curve ids.
SimulatedDataset simulate_dataset(const Scenario& scenario, int rep_index, Rng& rng);

struct MsieEntry {
  std::string estimator;
  double abias2 = 0.0;
  double avar = 0.0;
  double msie = 0.0;
  int n_reps = 0;
  /// Integrated squared error of each replicate; their mean equals msie.
  std::vector<double> per_rep;

  /// Monte Carlo standard error of msie from the per-replicate spread.
  double standard_error() const;
};

/// Rows of `estimates` are replicate curves on the grid. Throws TooFewReplicates.
MsieEntry compute_msie(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& truth,
                       const std::string& estimator = "");

struct StudySettings {
  McmcConfig mcmc;
  int basis_size = kDefaultBasisSize;
  int degree = 3;
  double delta_bandwidth = -1.0;  // < 0: default_delta_bandwidth(grid)
  unsigned threads = 0;           // 0: hardware concurrency
};

struct MsieReport {
  Scenario scenario;
  std::vector<MsieEntry> entries;

  const MsieEntry& entry(const std::string& estimator) const;
};

inline const std::vector<std::string> kEstimatorIds = {"bayes_iv", "naive_w"};

/// Fits one simulated replicate and returns the posterior-mean beta(t) on the grid.
Eigen::VectorXd fit_replicate(const SimulatedDataset& data, const std::string& estimator,
                              const StudySettings& settings, Rng& rng);

/// Replicates run concurrently; replicate r uses streams derived from
/// (scenario.seed, r), so the report does not depend on scheduling.
/// A failing replicate aborts the study. Throws InvalidScenario, InvalidConfig.
MsieReport run_study(const Scenario& scenario, const std::vector<std::string>& estimators,
                     const StudySettings& settings);

}  // namespace sofri
