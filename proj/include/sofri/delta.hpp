#pragma once

// Instrument scaling function delta(s): pointwise ratio of column sums of the
// instrument and the error-prone covariate, optionally kernel smoothed with
// weights proportional to the squared mean of W.

#include "sofri/fda.hpp"

namespace sofri {

struct DeltaEstimate {
  Grid grid;
  Eigen::VectorXd raw;
  Eigen::VectorXd smoothed;
  double bandwidth = 0.0;  // 0 disables smoothing
};

/// Twice the mean grid spacing.
double default_delta_bandwidth(const Grid& grid);

/// Throws GridMismatch, DimensionMismatch, ZeroDenominator, InvalidConfig.
DeltaEstimate estimate_delta(const FunctionalDataset& w, const FunctionalDataset& m,
                             double bandwidth);

/// Nadaraya-Watson smoother with a Gaussian kernel and optional nonnegative
/// per-point weights; bandwidth 0 returns `values`.
Eigen::VectorXd kernel_smooth(const Grid& grid, const Eigen::VectorXd& values,
                              double bandwidth, const Eigen::VectorXd& weights = {});

/// M*(s) = M(s) / delta(s) using the smoothed estimate. Throws GridMismatch, ZeroDelta.
FunctionalDataset scale_instrument(const FunctionalDataset& m, const DeltaEstimate& delta);

}  // namespace sofri
