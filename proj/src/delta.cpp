#include "sofri/delta.hpp"

#include "sofri/error.hpp"

#include <cmath>
#include <sstream>

namespace sofri {

double default_delta_bandwidth(const Grid& grid) { return 2.0 * grid.mean_spacing(); }

Eigen::VectorXd kernel_smooth(const Grid& grid, const Eigen::VectorXd& values,
                              double bandwidth, const Eigen::VectorXd& weights) {
  if (bandwidth == 0.0) return values;
  const bool weighted = weights.size() > 0;
  if (weighted && weights.size() != values.size()) {
    throw Error(ErrorCode::DimensionMismatch, "smoother weights do not match the values");
  }
  const auto T = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd out(T);
  for (Eigen::Index i = 0; i < T; ++i) {
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index j = 0; j < T; ++j) {
      const double u = (grid[i] - grid[j]) / bandwidth;
      const double k = std::exp(-0.5 * u * u) * (weighted ? weights[j] : 1.0);
      num += k * values[j];
      den += k;
    }
    out[i] = num / den;
  }
  return out;
}

DeltaEstimate estimate_delta(const FunctionalDataset& w, const FunctionalDataset& m,
                             double bandwidth) {
  if (!(w.grid == m.grid)) {
    throw Error(ErrorCode::GridMismatch, "W and M are observed on different grids");
  }
  if (w.values.rows() != m.values.rows() || w.values.cols() != m.values.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "W and M have different shapes");
  }
  if (!(bandwidth >= 0.0) || !std::isfinite(bandwidth)) {
    throw Error(ErrorCode::InvalidConfig, "delta bandwidth must be finite and >= 0");
  }
  const auto n = static_cast<double>(w.values.rows());
  const Eigen::RowVectorXd w_sum = w.values.colwise().sum();
  const Eigen::RowVectorXd m_sum = m.values.colwise().sum();
  const Eigen::RowVectorXd w_rms = (w.values.array().square().colwise().sum() / n).sqrt();

  DeltaEstimate est;
  est.grid = w.grid;
  est.bandwidth = bandwidth;
  est.raw.resize(w_sum.size());
  for (Eigen::Index t = 0; t < w_sum.size(); ++t) {
    if (std::abs(w_sum[t]) <= 1e-12 * n * w_rms[t]) {
      std::ostringstream msg;
      msg << "sum of W is zero at s=" << w.grid[static_cast<std::size_t>(t)];
      throw Error(ErrorCode::ZeroDenominator, msg.str());
    }
    est.raw[t] = m_sum[t] / w_sum[t];
  }
  // The ratio's variance scales like 1/mean(W)^2, so near zero crossings of
  // the mean the raw estimates are wild; weight them down accordingly.
  const Eigen::VectorXd precision = (w_sum / n).transpose().array().square();
  est.smoothed = kernel_smooth(est.grid, est.raw, bandwidth, precision);
  return est;
}

FunctionalDataset scale_instrument(const FunctionalDataset& m, const DeltaEstimate& delta) {
  if (!(m.grid == delta.grid)) {
    throw Error(ErrorCode::GridMismatch, "instrument grid differs from the delta grid");
  }
  for (Eigen::Index t = 0; t < delta.smoothed.size(); ++t) {
    if (delta.smoothed[t] == 0.0 || !std::isfinite(delta.smoothed[t])) {
      throw Error(ErrorCode::ZeroDelta,
                  "delta is zero or non-finite at index " + std::to_string(t));
    }
  }
  FunctionalDataset out = m;
  out.values = m.values.array().rowwise() / delta.smoothed.transpose().array();
  return out;
}

}  // namespace sofri
