#include "support.hpp"

#include "sofri/delta.hpp"
#include "sofri/rng.hpp"

using namespace sofri;

namespace {

FunctionalDataset random_curves(const Grid& grid, int n, double mean, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd v(n, static_cast<Eigen::Index>(grid.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = mean + rng.normal();
  return make_dataset(grid, v);
}

}  // namespace

TEST_SUITE("delta") {

TEST_CASE("ratio estimates on exact multiples") {
  const Grid grid = equispaced_grid(20);
  const FunctionalDataset w = random_curves(grid, 30, 3.0, 1);
  const DeltaEstimate same = estimate_delta(w, w, 0.0);
  CHECK((same.raw.array() - 1.0).abs().maxCoeff() < 1e-15);
  CHECK((same.smoothed.array() - 1.0).abs().maxCoeff() < 1e-15);

  FunctionalDataset m = w;
  m.values *= 2.0;
  for (const double h : {0.0, 0.05, 0.3}) {
    const DeltaEstimate d = estimate_delta(w, m, h);
    CHECK((d.raw.array() - 2.0).abs().maxCoeff() < 1e-14);
    CHECK((d.smoothed.array() - 2.0).abs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("scaling identity and scale equivariance") {
  const Grid grid = equispaced_grid(25);
  const FunctionalDataset w = random_curves(grid, 40, 1.5, 2);
  const FunctionalDataset m = random_curves(grid, 40, 2.5, 3);
  const DeltaEstimate d = estimate_delta(w, m, 0.0);
  const FunctionalDataset m_star = scale_instrument(m, d);
  const Eigen::RowVectorXd lhs = m_star.values.colwise().sum();
  const Eigen::RowVectorXd rhs = w.values.colwise().sum();
  CHECK(((lhs - rhs).array().abs() / rhs.array().abs()).maxCoeff() < 1e-8);

  FunctionalDataset m3 = m;
  m3.values *= 3.0;
  const DeltaEstimate d3 = estimate_delta(w, m3, 0.0);
  CHECK(((d3.raw - 3.0 * d.raw).array().abs() / d.raw.array().abs()).maxCoeff() < 1e-14);
}

TEST_CASE("smoothed values are convex combinations of the raw ratios") {
  const Grid grid = equispaced_grid(30);
  const FunctionalDataset w = random_curves(grid, 20, 0.5, 4);
  const FunctionalDataset m = random_curves(grid, 20, 1.0, 5);
  for (const double h : {0.01, 0.04, 0.2, 5.0}) {
    const DeltaEstimate d = estimate_delta(w, m, h);
    CHECK(d.smoothed.minCoeff() >= d.raw.minCoeff() - 1e-12);
    CHECK(d.smoothed.maxCoeff() <= d.raw.maxCoeff() + 1e-12);
  }
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(30, -1.0, 4.0);
  const Eigen::VectorXd s = kernel_smooth(grid, v, 0.1);
  CHECK(s.minCoeff() >= -1.0);
  CHECK(s.maxCoeff() <= 4.0);
  CHECK((kernel_smooth(grid, v, 0.0) - v).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("weighted smoothing discounts unreliable points") {
  const Grid grid = equispaced_grid(11);
  Eigen::VectorXd values = Eigen::VectorXd::Constant(11, 2.0);
  values[5] = 1e6;
  Eigen::VectorXd weights = Eigen::VectorXd::Ones(11);
  weights[5] = 0.0;
  const Eigen::VectorXd s = kernel_smooth(grid, values, 0.1, weights);
  CHECK((s.array() - 2.0).abs().maxCoeff() < 1e-12);
  CHECK_THROWS_CODE(kernel_smooth(grid, values, 0.1, Eigen::VectorXd::Ones(3)),
                    ErrorCode::DimensionMismatch);
}

TEST_CASE("delta errors") {
  const Grid grid = equispaced_grid(10);
  const FunctionalDataset w = random_curves(grid, 5, 2.0, 6);
  const FunctionalDataset other_grid = random_curves(equispaced_grid(11), 5, 2.0, 7);
  CHECK_THROWS_CODE(estimate_delta(w, other_grid, 0.0), ErrorCode::GridMismatch);
  CHECK_THROWS_CODE(estimate_delta(w, random_curves(grid, 6, 2.0, 8), 0.0),
                    ErrorCode::DimensionMismatch);
  CHECK_THROWS_CODE(estimate_delta(w, w, -1.0), ErrorCode::InvalidConfig);

  FunctionalDataset zero_col = w;
  zero_col.values.col(3).setZero();
  zero_col.values(0, 3) = 1.0;
  zero_col.values(1, 3) = -1.0;
  CHECK_THROWS_CODE(estimate_delta(zero_col, w, 0.0), ErrorCode::ZeroDenominator);
}

TEST_CASE("instrument scaling") {
  const Grid grid = equispaced_grid(6);
  const FunctionalDataset m = make_dataset(grid, Eigen::MatrixXd::Constant(3, 6, 4.0));
  DeltaEstimate d;
  d.grid = grid;
  d.raw = d.smoothed = Eigen::VectorXd::Ones(6);
  CHECK((scale_instrument(m, d).values - m.values).cwiseAbs().maxCoeff() == 0.0);
  d.smoothed.setConstant(2.0);
  CHECK((scale_instrument(m, d).values.array() - 2.0).abs().maxCoeff() == 0.0);
  d.smoothed[4] = 0.0;
  CHECK_THROWS_CODE(scale_instrument(m, d), ErrorCode::ZeroDelta);
  d.grid = equispaced_grid(6, 0.0, 2.0);
  CHECK_THROWS_CODE(scale_instrument(m, d), ErrorCode::GridMismatch);
}

TEST_CASE("default bandwidth is twice the spacing") {
  CHECK(default_delta_bandwidth(equispaced_grid(51)) == doctest::Approx(0.04));
}

}  // TEST_SUITE
