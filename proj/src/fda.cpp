#include "sofri/fda.hpp"

#include "sofri/error.hpp"

#include <cmath>
#include <sstream>

namespace sofri {

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw Error(ErrorCode::TooFewPoints, "grid needs at least 2 points, got " +
                                             std::to_string(points_.size()));
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) {
      throw Error(ErrorCode::NonMonotoneGrid,
                  "grid point " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && !(points_[i] > points_[i - 1])) {
      std::ostringstream msg;
      msg << "grid is not strictly increasing at index " << i << " (" << points_[i - 1]
          << " then " << points_[i] << ")";
      throw Error(ErrorCode::NonMonotoneGrid, msg.str());
    }
  }
}

Eigen::VectorXd Grid::as_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(points_.data(),
                                           static_cast<Eigen::Index>(points_.size()));
}

Grid build_grid(std::vector<double> points) { return Grid(std::move(points)); }

Grid equispaced_grid(std::size_t count, double lo, double hi) {
  std::vector<double> pts(count);
  for (std::size_t i = 0; i < count; ++i) {
    pts[i] = count == 1 ? lo
                        : lo + (hi - lo) * static_cast<double>(i) /
                                   static_cast<double>(count - 1);
  }
  if (count > 0) pts.back() = hi;
  return Grid(std::move(pts));
}

void FunctionalDataset::validate() const {
  if (values.rows() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "dataset has no curves");
  }
  if (static_cast<std::size_t>(values.cols()) != grid.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "dataset has " + std::to_string(values.cols()) + " columns but grid has " +
                    std::to_string(grid.size()) + " points");
  }
  if (ids.size() != static_cast<std::size_t>(values.rows())) {
    throw Error(ErrorCode::DimensionMismatch, "curve id count does not match row count");
  }
  if (!values.allFinite()) {
    throw Error(ErrorCode::DomainError, "dataset contains non-finite values");
  }
}

FunctionalDataset make_dataset(Grid grid, Eigen::MatrixXd values,
                               std::vector<std::string> ids) {
  if (ids.empty()) {
    ids.reserve(static_cast<std::size_t>(values.rows()));
    for (Eigen::Index i = 0; i < values.rows(); ++i) ids.push_back(std::to_string(i + 1));
  }
  FunctionalDataset data{std::move(grid), std::move(values), std::move(ids)};
  data.validate();
  return data;
}

Eigen::MatrixXd BasisSystem::gram() const {
  return values.transpose() * quad_weights.asDiagonal() * values;
}

Eigen::VectorXd trapezoid_weights(const Grid& grid) {
  const auto T = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(T);
  for (Eigen::Index t = 0; t + 1 < T; ++t) {
    const double half = 0.5 * (grid[t + 1] - grid[t]);
    w[t] += half;
    w[t + 1] += half;
  }
  return w;
}

Eigen::MatrixXd second_difference_operator(int basis_size) {
  const int rows = basis_size > 2 ? basis_size - 2 : 0;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows, basis_size);
  for (int r = 0; r < rows; ++r) {
    d(r, r) = 1.0;
    d(r, r + 1) = -2.0;
    d(r, r + 2) = 1.0;
  }
  return d;
}

namespace {

// Cox-de Boor evaluation of all basis functions of the given degree at x.
// The last knot span is closed on the right so x == knots.back() is covered.
Eigen::VectorXd eval_bsplines(const std::vector<double>& knots, int degree, int count,
                              double x) {
  const int n_knots = static_cast<int>(knots.size());
  // degree-0 indicators
  std::vector<double> b(static_cast<std::size_t>(n_knots - 1), 0.0);
  int span = -1;
  for (int i = 0; i < n_knots - 1; ++i) {
    if (knots[i] < knots[i + 1] && x >= knots[i] && x < knots[i + 1]) {
      span = i;
      break;
    }
  }
  if (span < 0) {
    // right endpoint: last non-degenerate span
    for (int i = n_knots - 2; i >= 0; --i) {
      if (knots[i] < knots[i + 1]) {
        span = i;
        break;
      }
    }
  }
  b[static_cast<std::size_t>(span)] = 1.0;

  for (int p = 1; p <= degree; ++p) {
    for (int i = 0; i < n_knots - 1 - p; ++i) {
      double value = 0.0;
      const double left_den = knots[i + p] - knots[i];
      if (left_den > 0.0) value += (x - knots[i]) / left_den * b[i];
      const double right_den = knots[i + p + 1] - knots[i + 1];
      if (right_den > 0.0) value += (knots[i + p + 1] - x) / right_den * b[i + 1];
      b[i] = value;
    }
  }
  Eigen::VectorXd out(count);
  for (int k = 0; k < count; ++k) out[k] = b[static_cast<std::size_t>(k)];
  return out;
}

}  // namespace

BasisSystem build_bspline_basis(const Grid& grid, int basis_size, int degree) {
  if (degree < 0) {
    throw Error(ErrorCode::InvalidK, "spline degree must be nonnegative");
  }
  if (basis_size < degree + 1) {
    throw Error(ErrorCode::InvalidK, "basis size " + std::to_string(basis_size) +
                                         " is below degree + 1 = " +
                                         std::to_string(degree + 1));
  }
  const double lo = grid.front();
  const double hi = grid.back();
  const int n_breaks = basis_size - degree + 1;  // includes both boundaries

  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(basis_size + degree + 1));
  for (int i = 0; i < degree; ++i) knots.push_back(lo);
  for (int j = 0; j < n_breaks; ++j) {
    knots.push_back(j == n_breaks - 1
                        ? hi
                        : lo + (hi - lo) * static_cast<double>(j) / (n_breaks - 1));
  }
  for (int i = 0; i < degree; ++i) knots.push_back(hi);

  BasisSystem basis;
  basis.grid = grid;
  basis.degree = degree;
  const auto T = static_cast<Eigen::Index>(grid.size());
  basis.values.resize(T, basis_size);
  for (Eigen::Index t = 0; t < T; ++t) {
    basis.values.row(t) = eval_bsplines(knots, degree, basis_size, grid[t]).transpose();
  }
  basis.quad_weights = trapezoid_weights(grid);
  const Eigen::MatrixXd d = second_difference_operator(basis_size);
  basis.penalty = d.transpose() * d;
  return basis;
}

ScoreMatrix project(const FunctionalDataset& data, const BasisSystem& basis,
                    ScoreSource source) {
  if (!(data.grid == basis.grid)) {
    throw Error(ErrorCode::GridMismatch, "dataset grid differs from the basis grid");
  }
  ScoreMatrix out;
  out.source = source;
  out.scores = data.values * (basis.quad_weights.asDiagonal() * basis.values);
  return out;
}

Eigen::VectorXd reconstruct_function(const Eigen::VectorXd& coeffs,
                                     const BasisSystem& basis) {
  if (coeffs.size() != basis.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(basis.size()) + " coefficients, got " +
                    std::to_string(coeffs.size()));
  }
  return basis.values * coeffs;
}

Eigen::VectorXd curve_from_scores(const Eigen::VectorXd& scores, const BasisSystem& basis) {
  if (scores.size() != basis.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(basis.size()) + " scores, got " +
                    std::to_string(scores.size()));
  }
  const Eigen::LDLT<Eigen::MatrixXd> gram(basis.gram());
  return basis.values * gram.solve(scores);
}

}  // namespace sofri
