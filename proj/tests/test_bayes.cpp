#include "support.hpp"

#include "sofri/distributions.hpp"
#include "sofri/mixture.hpp"
#include "sofri/rng.hpp"

#include <array>

using namespace sofri;
using sofri::testing::moments;

TEST_SUITE("bayes") {

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  bool differs_stream = false, differs_seed = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    differs_stream |= x != c.normal();
    differs_seed |= x != d.normal();
  }
  CHECK(differs_stream);
  CHECK(differs_seed);

  const Rng root(9);
  Rng s1 = root.derive(2), s2 = root.derive(2);
  for (int i = 0; i < 10; ++i) CHECK(s1.uniform() == s2.uniform());

  Rng u(1);
  for (int i = 0; i < 10000; ++i) {
    const double x = u.uniform();
    REQUIRE(x > 0.0);
    REQUIRE(x < 1.0);
  }
}

TEST_CASE("gamma draws have the right moments, including tiny shapes") {
  Rng rng(5);
  for (const double shape : {0.3, 1.0, 4.5}) {
    std::vector<double> v(100000);
    for (auto& x : v) x = rng.gamma(shape);
    const auto m = moments(v);
    CHECK(std::abs(m.mean - shape) < 4.0 * std::sqrt(shape / 1e5));
  }
  // log-space draws stay finite where the plain draw underflows
  for (int i = 0; i < 1000; ++i) REQUIRE(std::isfinite(rng.log_gamma_draw(1e-4)));
}

TEST_CASE("dirichlet") {
  Rng rng(7);
  const Eigen::VectorXd big = sample_dirichlet(rng, Eigen::Vector2d(1e9, 1e9));
  CHECK(std::abs(big[0] - 0.5) < 1e-3);
  CHECK(sample_dirichlet(rng, Eigen::VectorXd::Constant(1, 0.2))[0] == 1.0);

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) mean += sample_dirichlet(rng, Eigen::Vector3d(2, 2, 2));
  mean /= draws;
  CHECK((mean.array() - 1.0 / 3.0).abs().maxCoeff() < 0.01);

  // tiny concentrations (empty components with alpha/K) still give a simplex
  for (int i = 0; i < 1000; ++i) {
    const Eigen::VectorXd w = sample_dirichlet(rng, Eigen::VectorXd::Constant(5, 0.01));
    REQUIRE(w.allFinite());
    REQUIRE(std::abs(w.sum() - 1.0) < 1e-12);
    REQUIRE(w.minCoeff() >= 0.0);
  }
  CHECK_THROWS_CODE(sample_dirichlet(rng, Eigen::Vector2d(1.0, 0.0)),
                    ErrorCode::NonPositiveConcentration);
}

TEST_CASE("inverse wishart") {
  Rng rng(11);
  std::vector<double> v(100000);
  for (auto& x : v) x = sample_inverse_wishart(rng, 6.0, Eigen::MatrixXd::Constant(1, 1, 4.0))(0, 0);
  CHECK(std::abs(moments(v).mean - 1.0) < 0.02);

  Eigen::Matrix3d psi;
  psi << 2.0, 0.3, -0.1, 0.3, 1.0, 0.2, -0.1, 0.2, 0.5;
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    const Eigen::MatrixXd s = sample_inverse_wishart(rng, 9.0, psi);
    REQUIRE(Eigen::LLT<Eigen::MatrixXd>(s).info() == Eigen::Success);
    REQUIRE((s - s.transpose()).cwiseAbs().maxCoeff() == 0.0);
    acc += s;
  }
  acc /= draws;
  const Eigen::Matrix3d expected = psi / (9.0 - 3.0 - 1.0);
  CHECK((acc - expected).cwiseAbs().maxCoeff() < 0.02);

  for (int i = 0; i < 10000; ++i) {
    REQUIRE(Eigen::LLT<Eigen::MatrixXd>(sample_inverse_wishart(rng, 3.5, psi)).info() ==
            Eigen::Success);
  }
  CHECK_THROWS_CODE(sample_inverse_wishart(rng, 0.9, Eigen::Matrix2d::Identity()),
                    ErrorCode::InvalidDegreesOfFreedom);
  Eigen::Matrix2d bad;
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_CODE(sample_inverse_wishart(rng, 5.0, bad), ErrorCode::NonSpdScale);
}

TEST_CASE("mixture log density") {
  ScalarMixtureBlock one = make_scalar_block(1, 1.0, NigParams{}, 0);
  one.means[0] = 0.0;
  one.variances[0] = 1.0;
  CHECK(log_density_mixture(one, 0.0) == doctest::Approx(-0.9189385).epsilon(1e-7));

  ScalarMixtureBlock two = make_scalar_block(2, 1.0, NigParams{}, 0);
  two.weights << 0.5, 0.5;
  two.means << 0.7, 0.7;
  two.variances << 2.0, 2.0;
  one.means[0] = 0.7;
  one.variances[0] = 2.0;
  for (const double x : {-3.0, 0.0, 0.7, 5.0}) {
    CHECK(log_density_mixture(two, x) == doctest::Approx(log_density_mixture(one, x)).epsilon(1e-14));
  }

  ScalarMixtureBlock three = make_scalar_block(3, 1.0, NigParams{}, 0);
  three.weights << 0.2, 0.5, 0.3;
  three.means << -2.0, 0.0, 3.0;
  three.variances << 0.5, 1.0, 4.0;
  for (const double x : {-4.0, -1.0, 0.0, 2.5, 30.0}) {
    long double total = 0.0L;
    for (int k = 0; k < 3; ++k) {
      const long double z = (x - three.means[k]) * (x - three.means[k]) / three.variances[k];
      total += three.weights[k] * std::exp(-0.5L * z) /
               std::sqrt(2.0L * 3.14159265358979323846264338327950288L * three.variances[k]);
    }
    CHECK(log_density_mixture(three, x) ==
          doctest::Approx(static_cast<double>(std::log(total))).epsilon(1e-12));
  }

  NiwParams prior{Eigen::Vector2d::Zero(), 0.01, 4.0, Eigen::Matrix2d::Identity()};
  MvMixtureBlock mv = make_mv_block(1, 1.0, prior, 0);
  mv.components[0].mean.setZero();
  mv.components[0].set_cov(Eigen::Matrix2d::Identity());
  CHECK(log_density_mixture(mv, Eigen::Vector2d::Zero()) ==
        doctest::Approx(-2.0 * 0.9189385332046727).epsilon(1e-12));
}

TEST_CASE("allocation probabilities are normalized") {
  ScalarMixtureBlock b = make_scalar_block(4, 1.0, NigParams{}, 0);
  b.weights << 0.1, 0.2, 0.3, 0.4;
  b.means << -5.0, 0.0, 1.0, 50.0;
  b.variances << 1.0, 0.1, 3.0, 0.01;
  std::array<double, 4> p{};
  for (const double x : {-100.0, -5.0, 0.3, 49.9, 1e3}) {
    allocation_probabilities(b, x, p);
    CHECK(std::abs(p[0] + p[1] + p[2] + p[3] - 1.0) < 1e-12);
  }
}

TEST_CASE("categorical sampling") {
  Rng rng(13);
  const std::array<double, 3> logw{std::log(0.2), std::log(0.3), std::log(0.5)};
  std::array<double, 3> probs{};
  std::array<int, 3> counts{};
  for (int i = 0; i < 100000; ++i) ++counts[sample_categorical_log(rng, logw, probs)];
  CHECK(std::abs(counts[0] / 1e5 - 0.2) < 0.006);
  CHECK(std::abs(counts[2] / 1e5 - 0.5) < 0.006);
  CHECK(std::abs(probs[1] - 0.3) < 1e-12);
}

TEST_CASE("conjugate posteriors match the raw-sum formulas") {
  const std::vector<double> data{1.2, -0.4, 2.2, 0.9, 1.7};
  const NigParams prior{0.5, 0.2, 2.0, 1.5};
  const NigParams post = nig_posterior(prior, data);
  double s1 = 0, s2 = 0;
  for (const double x : data) s1 += x, s2 += x * x;
  const double kn = prior.kappa + 5;
  const double mn = (prior.kappa * prior.mean + s1) / kn;
  CHECK(post.kappa == doctest::Approx(kn));
  CHECK(post.mean == doctest::Approx(mn));
  CHECK(post.shape == doctest::Approx(prior.shape + 2.5));
  CHECK(post.rate ==
        doctest::Approx(prior.rate + 0.5 * (s2 + prior.kappa * prior.mean * prior.mean - kn * mn * mn)));

  Eigen::MatrixXd x(4, 2);
  x << 1.0, 0.5, -0.3, 2.0, 0.8, 0.1, 2.2, -1.0;
  NiwParams niw{Eigen::Vector2d(0.1, -0.2), 0.5, 5.0, Eigen::Matrix2d::Identity() * 2.0};
  const Eigen::VectorXd xbar = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - xbar.transpose();
  const NiwParams np = niw_posterior(niw, 4.0, xbar, centered.transpose() * centered);
  const double kn2 = 4.5;
  const Eigen::VectorXd mn2 = (0.5 * niw.mean + x.colwise().sum().transpose()) / kn2;
  const Eigen::MatrixXd psi = niw.scale + x.transpose() * x + 0.5 * niw.mean * niw.mean.transpose() -
                              kn2 * mn2 * mn2.transpose();
  CHECK((np.mean - mn2).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((np.scale - psi).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(np.dof == 9.0);
}

TEST_CASE("scalar mixture: empty component falls back to the prior") {
  Rng rng(17);
  const NigParams prior{0.0, 0.5, 3.0, 2.0};  // E[sigma2] = 1, Var[mu] = E[sigma2]/kappa = 2
  ScalarMixtureBlock b = make_scalar_block(2, 1.0, prior, 10);
  const std::vector<double> r(10, 0.25);
  std::vector<double> mu, s2;
  for (int i = 0; i < 40000; ++i) {
    update_components(b, r, rng);  // everybody sits on component 0
    mu.push_back(b.means[1]);
    s2.push_back(b.variances[1]);
  }
  const auto mm = moments(mu), ms = moments(s2);
  CHECK(std::abs(mm.mean) < 4.0 * mm.se());
  CHECK(std::abs(mm.var - 2.0) < 0.1);
  CHECK(std::abs(ms.mean - 1.0) < 4.0 * ms.se());
}

TEST_CASE("scalar mixture: single component matches the NIG posterior") {
  Rng rng(19);
  const NigParams prior{0.0, 0.01, 1.0, 1.0};
  const std::vector<double> r{0.3, 1.1, -0.2, 0.8, 0.5, 1.9, 0.0, 0.7, 1.2, 0.4,
                              -0.6, 0.9, 1.5, 0.2, 0.6, 1.0, 0.1, 0.8, 1.3, 0.5};
  double s1 = 0, s2 = 0;
  for (const double x : r) s1 += x, s2 += x * x;
  const double kn = prior.kappa + r.size();
  const double mn = s1 / kn;
  const double an = prior.shape + 0.5 * r.size();
  const double bn = prior.rate + 0.5 * (s2 - kn * mn * mn);

  ScalarMixtureBlock b = make_scalar_block(1, 1.0, prior, r.size());
  std::vector<double> mu, s2d;
  for (int i = 0; i < 100000; ++i) {
    gibbs_update_scalar_mixture(b, r, rng, false);
    mu.push_back(b.means[0]);
    s2d.push_back(b.variances[0]);
  }
  CHECK(std::abs(moments(mu).mean - mn) < 0.01);
  CHECK(std::abs(moments(s2d).mean - bn / (an - 1.0)) < 4.0 * moments(s2d).se());
}

TEST_CASE("scalar mixture: recentering") {
  Rng rng(23);
  std::vector<double> r(200);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = (i % 3 == 0 ? 2.0 : -1.0) + 0.3 * rng.normal();
  ScalarMixtureBlock b = make_scalar_block(5, 1.0, NigParams{}, r.size());
  for (int it = 0; it < 50; ++it) {
    const double shift = gibbs_update_scalar_mixture(b, r, rng);
    CHECK(std::abs(b.weights.dot(b.means)) < 1e-10);
    CHECK(std::isfinite(shift));
    b.check();
  }
  CHECK_THROWS_CODE(gibbs_update_scalar_mixture(b, std::vector<double>{}, rng),
                    ErrorCode::EmptyResiduals);
}

TEST_CASE("mv mixture: empty component, recentering and NIW posterior") {
  Rng rng(29);
  const NiwParams prior{Eigen::Vector2d::Zero(), 0.01, 6.0, Eigen::Matrix2d::Identity() * 3.0};

  // prior draw for an empty component: E[Sigma] = Psi / (nu - d - 1) = I
  {
    MvMixtureBlock b = make_mv_block(2, 1.0, prior, 5);
    const Eigen::MatrixXd r = Eigen::MatrixXd::Constant(5, 2, 0.1);
    Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) {
      update_components(b, r, rng);
      acc += b.components[1].cov;
    }
    acc /= draws;
    CHECK((acc - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 0.08);
  }

  Eigen::MatrixXd r(60, 2);
  for (Eigen::Index i = 0; i < 60; ++i) {
    r(i, 0) = (i % 2 ? 1.5 : -0.5) + 0.4 * rng.normal();
    r(i, 1) = 0.2 + 0.7 * rng.normal();
  }
  {
    MvMixtureBlock b = make_mv_block(4, 1.0, prior, 60);
    for (int it = 0; it < 30; ++it) {
      gibbs_update_mv_mixture(b, r, rng, true);
      Eigen::Vector2d m = Eigen::Vector2d::Zero();
      for (int k = 0; k < 4; ++k) m += b.weights[k] * b.components[k].mean;
      CHECK(m.cwiseAbs().maxCoeff() < 1e-10);
      b.check();
    }
    CHECK_THROWS_CODE(gibbs_update_mv_mixture(b, Eigen::MatrixXd::Zero(3, 3), rng, true),
                      ErrorCode::DimensionMismatch);
    CHECK_THROWS_CODE(gibbs_update_mv_mixture(b, Eigen::MatrixXd::Zero(0, 2), rng, true),
                      ErrorCode::EmptyResiduals);
  }
  {
    // K_comp = 1, fixed residuals: posterior mean of mu is kappa_n-weighted
    MvMixtureBlock b = make_mv_block(1, 1.0, prior, 60);
    const double kn = prior.kappa + 60;
    const Eigen::Vector2d mn = r.colwise().sum().transpose() / kn;
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) {
      gibbs_update_mv_mixture(b, r, rng, false);
      acc += b.components[0].mean;
    }
    acc /= draws;
    CHECK((acc - mn).cwiseAbs().maxCoeff() < 0.01);
  }
}

}  // TEST_SUITE
