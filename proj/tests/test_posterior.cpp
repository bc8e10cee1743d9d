#include "support.hpp"

#include "sofri/posterior.hpp"
#include "sofri/rng.hpp"

#include <algorithm>
#include <numeric>

using namespace sofri;

namespace {

PosteriorDraws empty_draws(int n_obs, int n_basis, int x_components = 4) {
  PosteriorDraws d;
  d.n_obs = n_obs;
  d.n_basis = n_basis;
  d.x_components = x_components;
  return d;
}

Draw make_draw(int iteration, Eigen::VectorXd gamma) {
  Draw d;
  d.iteration = iteration;
  d.gamma = std::move(gamma);
  d.beta_z = Eigen::VectorXd::Zero(0);
  d.tau = 1.0;
  return d;
}

// Two well-separated groups of curves with constant allocations.
struct TwoGroups {
  BasisSystem basis;
  PosteriorDraws draws;
  std::vector<int> truth;  // 1 for the first half, 2 for the second
};

TwoGroups two_groups(int n_per_group, int n_draws, std::uint64_t seed) {
  TwoGroups g;
  g.basis = build_bspline_basis(equispaced_grid(30), 6, 3);
  const int n = 2 * n_per_group;
  g.draws = empty_draws(n, 6);
  Rng rng(seed);
  Eigen::MatrixXd scores(n, 6);
  for (int i = 0; i < n; ++i) {
    const double shift = i < n_per_group ? 1.0 : -1.0;
    for (int k = 0; k < 6; ++k) scores(i, k) = shift + 0.05 * rng.normal();
    g.truth.push_back(i < n_per_group ? 1 : 2);
  }
  for (int it = 0; it < n_draws; ++it) {
    Draw d = make_draw(it, Eigen::VectorXd::Constant(6, 0.5 + 0.01 * rng.normal()));
    d.x_allocations.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      // components 2 and 3 hold the groups; the label values are arbitrary
      d.x_allocations[static_cast<std::size_t>(i)] = i < n_per_group ? 3 : 2;
    }
    g.draws.draws.push_back(std::move(d));
    if (it % 5 == 0) g.draws.snapshots.push_back({0, it, scores});
  }
  return g;
}

}  // namespace

TEST_SUITE("posterior") {

TEST_CASE("identical draws give degenerate bands") {
  const BasisSystem basis = build_bspline_basis(equispaced_grid(20), 5, 3);
  PosteriorDraws d = empty_draws(3, 5);
  Eigen::VectorXd gamma(5);
  gamma << 1.0, -2.0, 0.5, 0.0, 3.0;
  for (int i = 0; i < 10; ++i) d.draws.push_back(make_draw(i, gamma));
  const FunctionalSummary s = summarize_beta(d, basis, 0.9);
  const Eigen::VectorXd curve = basis.values * gamma;
  CHECK((s.mean - curve).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((s.lower - curve).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((s.upper - curve).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("symmetric draws around zero") {
  const BasisSystem basis = build_bspline_basis(equispaced_grid(20), 5, 3);
  PosteriorDraws d = empty_draws(3, 5);
  for (int i = 0; i < 100; ++i) {
    d.draws.push_back(make_draw(i, (i % 2 == 0 ? 1.0 : -1.0) * Eigen::VectorXd::Unit(5, 0)));
  }
  const FunctionalSummary s = summarize_beta(d, basis, 0.9);
  CHECK(s.mean.cwiseAbs().maxCoeff() < 1e-15);
  CHECK((s.upper - basis.values.col(0)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((s.lower + basis.values.col(0)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("Gaussian draws recover normal quantiles") {
  const BasisSystem flat = build_bspline_basis(equispaced_grid(5), 1, 0);
  PosteriorDraws d = empty_draws(2, 1);
  Rng rng(21);
  for (int i = 0; i < 100000; ++i) {
    d.draws.push_back(make_draw(i, Eigen::VectorXd::Constant(1, rng.normal())));
  }
  const FunctionalSummary s = summarize_beta(d, flat, 0.9);
  CHECK(std::abs(s.lower[0] + 1.6448536) < 0.02);
  CHECK(std::abs(s.upper[0] - 1.6448536) < 0.02);
  const FunctionalSummary s95 = summarize_beta(d, flat, 0.95);
  CHECK(std::abs(s95.upper[2] - 1.9599640) < 0.03);
}

TEST_CASE("order-statistic intervals") {
  std::vector<double> v(20);
  std::iota(v.begin(), v.end(), 1.0);
  std::shuffle(v.begin(), v.end(), std::mt19937_64(3));
  CHECK(equal_tailed_interval(v, 0.9) == std::make_pair(1.0, 20.0));
  CHECK(equal_tailed_interval(v, 0.5) == std::make_pair(5.0, 16.0));
  CHECK(equal_tailed_interval(v, 0.6) == std::make_pair(4.0, 17.0));
  CHECK(equal_tailed_interval({2.0}, 0.9) == std::make_pair(2.0, 2.0));
  CHECK_THROWS_CODE(equal_tailed_interval({}, 0.9), ErrorCode::TooFewDraws);
  CHECK_THROWS_CODE(equal_tailed_interval(v, 1.0), ErrorCode::InvalidConfig);
  CHECK_THROWS_CODE(equal_tailed_interval(v, 0.0), ErrorCode::InvalidConfig);
}

TEST_CASE("intervals nest as the level grows") {
  const BasisSystem basis = build_bspline_basis(equispaced_grid(15), 4, 3);
  PosteriorDraws d = empty_draws(2, 4);
  Rng rng(22);
  for (int i = 0; i < 500; ++i) {
    Eigen::VectorXd g(4);
    for (int k = 0; k < 4; ++k) g[k] = rng.gamma(1.5);  // skewed
    d.draws.push_back(make_draw(i, g));
  }
  FunctionalSummary prev = summarize_beta(d, basis, 0.5);
  for (const double level : {0.8, 0.9, 0.95, 0.99}) {
    const FunctionalSummary s = summarize_beta(d, basis, level);
    CHECK((s.lower.array() <= prev.lower.array()).all());
    CHECK((s.upper.array() >= prev.upper.array()).all());
    CHECK((s.lower.array() <= s.mean.array()).all());
    CHECK((s.mean.array() <= s.upper.array()).all());
    prev = s;
  }
}

TEST_CASE("scalar summaries and draw-count errors") {
  PosteriorDraws d = empty_draws(2, 1);
  for (int i = 0; i < 4; ++i) {
    Draw dr = make_draw(i, Eigen::VectorXd::Zero(1));
    dr.alpha0 = i;
    dr.beta_z = Eigen::VectorXd::Constant(2, -i);
    dr.tau = 2.0;
    d.draws.push_back(dr);
  }
  d.n_covariates = 2;
  const auto rows = summarize_scalars(d, 0.9);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].name == "alpha0");
  CHECK(rows[0].mean == doctest::Approx(1.5));
  CHECK(rows[0].lower == 0.0);
  CHECK(rows[0].upper == 3.0);
  CHECK(rows[1].name == "beta_z_1");
  CHECK(rows[2].mean == doctest::Approx(-1.5));
  CHECK(rows[3].name == "tau");
  CHECK(rows[3].lower == 2.0);

  PosteriorDraws one = empty_draws(2, 1);
  one.draws.push_back(make_draw(0, Eigen::VectorXd::Zero(1)));
  CHECK_THROWS_CODE(summarize_scalars(one, 0.9), ErrorCode::TooFewDraws);
  CHECK_THROWS_CODE(summarize_beta(one, build_bspline_basis(equispaced_grid(5), 1, 0), 0.9),
                    ErrorCode::TooFewDraws);
}

TEST_CASE("similarity matrix") {
  PosteriorDraws d = empty_draws(4, 1, 3);
  const std::vector<std::vector<int>> allocs = {{0, 0, 1, 2}, {0, 1, 1, 2}, {2, 2, 2, 2}, {1, 0, 1, 0}};
  for (std::size_t i = 0; i < allocs.size(); ++i) {
    Draw dr = make_draw(static_cast<int>(i), Eigen::VectorXd::Zero(1));
    dr.x_allocations = allocs[i];
    d.draws.push_back(dr);
  }
  d.draws.push_back(make_draw(9, Eigen::VectorXd::Zero(1)));  // no allocations: skipped
  const Eigen::MatrixXd s = similarity_matrix(d);
  // brute-force oracle
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double same = 0.0;
      for (const auto& a : allocs) same += a[i] == a[j];
      CHECK(s(i, j) == doctest::Approx(same / 4.0));
    }
  }
  CHECK((s - s.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s.diagonal().array() == 1.0).all());

  PosteriorDraws none = empty_draws(4, 1, 3);
  none.draws.push_back(make_draw(0, Eigen::VectorXd::Zero(1)));
  CHECK_THROWS_CODE(similarity_matrix(none), ErrorCode::NoAllocationSnapshots);
}

TEST_CASE("average linkage on a block distance matrix") {
  Eigen::MatrixXd dist = Eigen::MatrixXd::Constant(6, 6, 1.0);
  for (const auto& block : {std::vector<int>{0, 2, 4}, std::vector<int>{1, 3}}) {
    for (int a : block)
      for (int b : block) dist(a, b) = 0.1;
  }
  dist.diagonal().setZero();
  const auto labels = average_linkage(dist, 3);
  CHECK(labels == std::vector<int>{1, 2, 1, 2, 1, 3});
  const auto one = average_linkage(dist, 1);
  CHECK(std::all_of(one.begin(), one.end(), [](int l) { return l == 1; }));
}

TEST_CASE("cluster extraction recovers two separated groups") {
  const TwoGroups g = two_groups(10, 50, 23);
  const ClusterResult c = extract_clusters(g.draws, g.basis);
  CHECK(c.n_clusters == 2);
  CHECK(c.truncation == 4);
  CHECK(c.sizes == std::vector<int>{10, 10});
  CHECK(c.labels == g.truth);
  CHECK(c.cluster_mean_curves.rows() == 2);
  CHECK(c.cluster_mean_curves.row(0).mean() > 0.5);
  CHECK(c.cluster_mean_curves.row(1).mean() < -0.5);

  // relabelling the mixture components changes nothing
  TwoGroups swapped = g;
  for (auto& d : swapped.draws.draws) {
    for (auto& z : d.x_allocations) z = z == 3 ? 0 : 1;
  }
  CHECK(extract_clusters(swapped.draws, g.basis).labels == c.labels);

  TwoGroups bare = g;
  bare.draws.snapshots.clear();
  CHECK_THROWS_CODE(extract_clusters(bare.draws, g.basis), ErrorCode::NoAllocationSnapshots);
}

TEST_CASE("a single occupied component gives one cluster") {
  TwoGroups g = two_groups(5, 20, 24);
  for (auto& d : g.draws.draws) std::fill(d.x_allocations.begin(), d.x_allocations.end(), 1);
  const ClusterResult c = extract_clusters(g.draws, g.basis);
  CHECK(c.n_clusters == 1);
  CHECK(c.sizes == std::vector<int>{10});
  CHECK_THROWS_CODE(cluster_contrast(g.draws, c, 1, 2, g.basis, 0.9), ErrorCode::EmptyCluster);
}

TEST_CASE("cluster contrasts") {
  const TwoGroups g = two_groups(10, 60, 25);
  const ClusterResult c = extract_clusters(g.draws, g.basis);
  const ContrastSummary self = cluster_contrast(g.draws, c, 1, 1, g.basis, 0.9);
  CHECK(self.mean == 0.0);
  CHECK(self.lower == 0.0);
  CHECK(self.upper == 0.0);

  const ContrastSummary ab = cluster_contrast(g.draws, c, 1, 2, g.basis, 0.9);
  const ContrastSummary ba = cluster_contrast(g.draws, c, 2, 1, g.basis, 0.9);
  REQUIRE(ab.values.size() == g.draws.draw_count());
  for (std::size_t i = 0; i < ab.values.size(); ++i) CHECK(ab.values[i] == -ba.values[i]);
  CHECK(ab.mean == doctest::Approx(-ba.mean));
  CHECK(ab.lower == doctest::Approx(-ba.upper));
  CHECK(ab.mean > 0.0);
  CHECK(ab.lower <= ab.mean);
  CHECK(ab.mean <= ab.upper);

  // independent oracle for the first draw: trapezoid integral on the grid
  const Eigen::VectorXd beta = g.basis.values * g.draws.draws[0].gamma;
  const Eigen::MatrixXd& scores = g.draws.snapshots[0].scores;
  const Eigen::VectorXd diff = curve_from_scores(scores.topRows(10).colwise().mean().transpose(), g.basis) -
                               curve_from_scores(scores.bottomRows(10).colwise().mean().transpose(), g.basis);
  const Eigen::VectorXd w = trapezoid_weights(g.basis.grid);
  CHECK(ab.values[0] == doctest::Approx(w.dot(beta.cwiseProduct(diff))).epsilon(1e-10));

  PosteriorDraws zero = g.draws;
  for (auto& d : zero.draws) d.gamma.setZero();
  const ContrastSummary z = cluster_contrast(zero, c, 1, 2, g.basis, 0.9);
  CHECK(z.mean == 0.0);
  CHECK(z.upper == 0.0);

  CHECK_THROWS_CODE(cluster_contrast(g.draws, c, 1, 3, g.basis, 0.9), ErrorCode::EmptyCluster);
  CHECK_THROWS_CODE(cluster_contrast(g.draws, c, 0, 1, g.basis, 0.9), ErrorCode::EmptyCluster);
}

}  // TEST_SUITE
