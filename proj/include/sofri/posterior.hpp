#pragma once

// Summaries of stored posterior draws: pointwise credible bands for beta(t),
// scalar coefficient tables, a label-free clustering of the latent curves
// from the posterior similarity matrix, and between-cluster contrasts.

#include "sofri/fda.hpp"
#include "sofri/model.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace sofri {

/// Equal-tailed interval from order statistics: with j = ceil(N (1 - level) / 2)
/// (at least 1) the bounds are the j-th smallest and j-th largest values.
std::pair<double, double> equal_tailed_interval(std::vector<double> values, double level);

struct FunctionalSummary {
  Grid grid;
  Eigen::VectorXd mean;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double level = 0.9;
};

/// Throws TooFewDraws, InvalidConfig (level outside (0,1)), DimensionMismatch.
FunctionalSummary summarize_beta(const PosteriorDraws& draws, const BasisSystem& basis,
                                 double level);

struct ScalarSummary {
  std::string name;
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Rows for alpha0, beta_z_1..p and tau.
std::vector<ScalarSummary> summarize_scalars(const PosteriorDraws& draws, double level);

/// S[i,j] = fraction of draws allocating i and j to the same latent component.
Eigen::MatrixXd similarity_matrix(const PosteriorDraws& draws);

struct ClusterResult {
  std::vector<int> labels;  // 1..n_clusters, largest cluster first
  int n_clusters = 0;
  Eigen::MatrixXd cluster_mean_curves;  // n_clusters x T
  std::vector<int> sizes;
  /// Truncation level of the latent mixture; components beyond n_clusters
  /// are reported as empty.
  int truncation = 0;
};

/// Average-linkage clustering on 1 - S, cut at the modal number of occupied
/// components. Throws NoAllocationSnapshots.
ClusterResult extract_clusters(const PosteriorDraws& draws, const BasisSystem& basis);

/// Average linkage on a symmetric distance matrix, stopped at `n_clusters`
/// groups. Returned labels are 1-based, ordered by decreasing size.
std::vector<int> average_linkage(const Eigen::MatrixXd& distance, int n_clusters);

struct ContrastSummary {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> values;  // one per draw
};

/// Per draw: sum_t w_t beta(t) (Xbar_a(t) - Xbar_b(t)), with the cluster mean
/// curves taken from the latent snapshot of the same chain nearest in
/// iteration. Clusters are 1-based labels. Throws EmptyCluster.
ContrastSummary cluster_contrast(const PosteriorDraws& draws, const ClusterResult& clusters,
                                 int cluster_a, int cluster_b, const BasisSystem& basis,
                                 double level);

}  // namespace sofri
