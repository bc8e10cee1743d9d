#include "support.hpp"

#include "sofri/fda.hpp"

#include <Eigen/Eigenvalues>

#include <limits>

using namespace sofri;

TEST_SUITE("fda") {

TEST_CASE("grid validation") {
  CHECK(build_grid({0.0, 0.5, 1.0}).size() == 3);
  CHECK_THROWS_CODE(build_grid({0.0, 0.0, 1.0}), ErrorCode::NonMonotoneGrid);
  CHECK_THROWS_CODE(build_grid({0.0, 0.7, 0.5}), ErrorCode::NonMonotoneGrid);
  CHECK_THROWS_CODE(build_grid({0.3}), ErrorCode::TooFewPoints);
  CHECK_THROWS_CODE(build_grid({0.0, std::numeric_limits<double>::quiet_NaN()}),
                    ErrorCode::NonMonotoneGrid);

  const Grid g = equispaced_grid(5);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(g[2] == doctest::Approx(0.5));
}

TEST_CASE("second-difference penalty for K = 4") {
  const Grid grid = equispaced_grid(20);
  const BasisSystem basis = build_bspline_basis(grid, 4, 3);
  Eigen::MatrixXd expected(4, 4);
  expected << 1, -2, 1, 0, -2, 5, -4, 1, 1, -4, 5, -2, 0, 1, -2, 1;
  CHECK((basis.penalty - expected).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::MatrixXd d = second_difference_operator(4);
  CHECK(d.rows() == 2);
  CHECK(d(0, 0) == 1.0);
  CHECK(d(0, 1) == -2.0);
  CHECK(d(1, 3) == 1.0);
}

TEST_CASE("trapezoid weights on 101 equispaced points") {
  const Eigen::VectorXd w = trapezoid_weights(equispaced_grid(101));
  CHECK(w[0] == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(w[50] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(w[100] == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-12));

  // weights sum to the interval length on a non-uniform grid too
  const Grid uneven = build_grid({-1.0, -0.2, 0.1, 2.5});
  CHECK(trapezoid_weights(uneven).sum() == doctest::Approx(3.5).epsilon(1e-14));
}

TEST_CASE("B-spline partition of unity") {
  for (const std::size_t T : {7u, 30u, 50u, 101u}) {
    for (const int K : {4, 6, 10, 15}) {
      const BasisSystem b = build_bspline_basis(equispaced_grid(T), K, 3);
      CHECK(b.values.rows() == static_cast<Eigen::Index>(T));
      CHECK(b.size() == K);
      const double worst = (b.values.rowwise().sum().array() - 1.0).abs().maxCoeff();
      CHECK(worst < 1e-10);
      CHECK(b.values.minCoeff() >= 0.0);
    }
  }
  // irregular grid
  const BasisSystem b = build_bspline_basis(build_grid({0.0, 0.05, 0.3, 0.31, 0.8, 1.7, 2.0}), 5, 2);
  CHECK((b.values.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-10);
}

TEST_CASE("basis size must exceed the degree") {
  const Grid grid = equispaced_grid(20);
  CHECK_THROWS_CODE(build_bspline_basis(grid, 3, 3), ErrorCode::InvalidK);
  CHECK_NOTHROW(build_bspline_basis(grid, 4, 3));
}

TEST_CASE("penalty is PSD with an affine null space") {
  const BasisSystem b = build_bspline_basis(equispaced_grid(40), 12, 3);
  const Eigen::MatrixXd& P = b.penalty;
  CHECK((P - P.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(12);
  const Eigen::VectorXd ramp = Eigen::VectorXd::LinSpaced(12, 0.0, 11.0);
  CHECK((P * ones).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((P * ramp).cwiseAbs().maxCoeff() < 1e-10);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P);
  CHECK(eig.eigenvalues().minCoeff() > -1e-10);
  int rank = 0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) rank += eig.eigenvalues()[i] > 1e-8;
  CHECK(rank == 10);
  CHECK(b.penalty_rank() == 10);
}

TEST_CASE("projection against closed-form integrals") {
  // single constant basis function: K = 1, degree 0
  const Grid grid = equispaced_grid(1001);
  const BasisSystem flat = build_bspline_basis(grid, 1, 0);
  CHECK((flat.values.array() - 1.0).abs().maxCoeff() == 0.0);

  Eigen::MatrixXd values(3, 1001);
  values.row(0).setConstant(2.5);
  values.row(1).setZero();
  values.row(2) = grid.as_vector().transpose();  // W(s) = s
  const ScoreMatrix s = project(make_dataset(grid, values), flat);
  CHECK(s.scores(0, 0) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(s.scores(1, 0) == 0.0);
  CHECK(std::abs(s.scores(2, 0) - 0.5) < 1e-6);

  // affine curves integrate exactly under the trapezoid rule
  const Grid coarse = build_grid({0.0, 0.1, 0.45, 0.5, 1.0});
  Eigen::MatrixXd affine(1, 5);
  for (int t = 0; t < 5; ++t) affine(0, t) = 3.0 - 2.0 * coarse[t];
  const ScoreMatrix sa = project(make_dataset(coarse, affine), build_bspline_basis(coarse, 1, 0));
  CHECK(sa.scores(0, 0) == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("projection is linear and checks the grid") {
  const Grid grid = equispaced_grid(25);
  const BasisSystem b = build_bspline_basis(grid, 8, 3);
  Rng rng(3);
  Eigen::MatrixXd x(4, 25), y(4, 25);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x.data()[i] = rng.normal();
    y.data()[i] = rng.normal();
  }
  const double a = 1.7, c = -0.3;
  const Eigen::MatrixXd lhs = project(make_dataset(grid, a * x + c * y), b).scores;
  const Eigen::MatrixXd rhs =
      a * project(make_dataset(grid, x), b).scores + c * project(make_dataset(grid, y), b).scores;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);

  const BasisSystem other = build_bspline_basis(equispaced_grid(26), 8, 3);
  CHECK_THROWS_CODE(project(make_dataset(grid, x), other), ErrorCode::GridMismatch);
}

TEST_CASE("reconstruction and the Gram identity") {
  const Grid grid = equispaced_grid(40);
  const BasisSystem b = build_bspline_basis(grid, 9, 3);
  CHECK(reconstruct_function(Eigen::VectorXd::Zero(9), b).cwiseAbs().maxCoeff() == 0.0);
  for (int k = 0; k < 9; ++k) {
    const Eigen::VectorXd e = Eigen::VectorXd::Unit(9, k);
    CHECK((reconstruct_function(e, b) - b.values.col(k)).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_CODE(reconstruct_function(Eigen::VectorXd::Zero(8), b), ErrorCode::DimensionMismatch);

  // Gram matrix by explicit loops
  const Eigen::VectorXd w = trapezoid_weights(grid);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(9, 9);
  for (int j = 0; j < 9; ++j)
    for (int k = 0; k < 9; ++k)
      for (int t = 0; t < 40; ++t) gram(j, k) += w[t] * b.values(t, j) * b.values(t, k);
  CHECK((gram - b.gram()).cwiseAbs().maxCoeff() < 1e-14);

  Eigen::VectorXd gamma(9);
  gamma << 0.3, -1.0, 2.0, 0.5, 0.0, -0.7, 1.1, 0.2, -0.4;
  const Eigen::VectorXd curve = reconstruct_function(gamma, b);
  const Eigen::MatrixXd row = curve.transpose();
  const Eigen::VectorXd scores = project(make_dataset(grid, row), b).scores.row(0).transpose();
  CHECK((scores - gram * gamma).cwiseAbs().maxCoeff() < 1e-12);

  // scores map back to the curve for anything in the span of the basis
  CHECK((curve_from_scores(scores, b) - curve).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("datasets validate their shape") {
  const Grid grid = equispaced_grid(5);
  CHECK_THROWS(make_dataset(grid, Eigen::MatrixXd::Zero(2, 4)));
  const FunctionalDataset d = make_dataset(grid, Eigen::MatrixXd::Zero(2, 5));
  REQUIRE(d.ids.size() == 2);
  CHECK(d.ids[0] == "1");
  CHECK(d.ids[1] == "2");
}

}  // TEST_SUITE
