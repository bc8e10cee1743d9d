#pragma once

// Functional-data containers, B-spline bases on an observation grid, and the
// quadrature projection that turns curves into score vectors.

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace sofri {

/// Ordered observation points shared by every curve in a dataset.
class Grid {
 public:
  Grid() = default;

  /// Throws NonMonotoneGrid or TooFewPoints.
  explicit Grid(std::vector<double> points);

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<double>& points() const noexcept { return points_; }
  double operator[](std::size_t i) const { return points_[i]; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }
  double length() const { return points_.back() - points_.front(); }
  double mean_spacing() const { return length() / static_cast<double>(size() - 1); }

  Eigen::VectorXd as_vector() const;

  bool operator==(const Grid& other) const = default;

 private:
  std::vector<double> points_;
};

Grid build_grid(std::vector<double> points);

/// `count` equally spaced points on [lo, hi] inclusive.
Grid equispaced_grid(std::size_t count, double lo = 0.0, double hi = 1.0);

/// n curves evaluated on a common grid; row i is curve i.
struct FunctionalDataset {
  Grid grid;
  Eigen::MatrixXd values;
  std::vector<std::string> ids;

  std::size_t n_curves() const { return static_cast<std::size_t>(values.rows()); }

  /// Throws DimensionMismatch / DomainError when the invariants fail.
  void validate() const;
};

/// Builds a dataset with ids "1".."n" when `ids` is empty.
FunctionalDataset make_dataset(Grid grid, Eigen::MatrixXd values,
                               std::vector<std::string> ids = {});

struct BasisSystem {
  Grid grid;
  Eigen::MatrixXd values;        // T x K, column k = basis function k on the grid
  Eigen::VectorXd quad_weights;  // trapezoid weights, length T
  Eigen::MatrixXd penalty;       // K x K second-difference penalty D^T D
  int degree = 3;

  int size() const { return static_cast<int>(values.cols()); }
  int penalty_rank() const { return size() > 2 ? size() - 2 : 0; }

  /// G[j,k] = sum_t w_t B[t,j] B[t,k].
  Eigen::MatrixXd gram() const;
};

inline constexpr int kDefaultBasisSize = 15;

/// Clamped B-splines with equally spaced interior knots over the grid range.
/// Throws InvalidK when K < degree + 1.
BasisSystem build_bspline_basis(const Grid& grid, int basis_size = kDefaultBasisSize,
                                int degree = 3);

Eigen::VectorXd trapezoid_weights(const Grid& grid);

/// (K-2) x K second-order difference operator (zero rows when K < 3).
Eigen::MatrixXd second_difference_operator(int basis_size);

enum class ScoreSource { W, MStar, X, Other };

struct ScoreMatrix {
  Eigen::MatrixXd scores;  // n x K
  ScoreSource source = ScoreSource::Other;
};

/// scores[i,k] = sum_t w_t B[t,k] values[i,t]. Throws GridMismatch.
ScoreMatrix project(const FunctionalDataset& data, const BasisSystem& basis,
                    ScoreSource source = ScoreSource::Other);

/// B * coeffs on the grid. Throws DimensionMismatch.
Eigen::VectorXd reconstruct_function(const Eigen::VectorXd& coeffs,
                                     const BasisSystem& basis);

/// Curve in the span of the basis whose projection equals `scores`:
/// B G^{-1} scores. Integrating it against B*gamma gives gamma . scores.
Eigen::VectorXd curve_from_scores(const Eigen::VectorXd& scores, const BasisSystem& basis);

}  // namespace sofri
