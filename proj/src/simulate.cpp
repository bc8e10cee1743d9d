#include "sofri/simulate.hpp"

#include "sofri/delta.hpp"
#include "sofri/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

namespace sofri {

TrueBeta parse_true_beta(const std::string& name) {
  if (name == "sine") return TrueBeta::Sine;
  if (name == "quadratic") return TrueBeta::Quadratic;
  throw Error(ErrorCode::InvalidScenario, "unknown true_beta '" + name + "'");
}

ErrorDist parse_error_dist(const std::string& name) {
  if (name == "normal") return ErrorDist::Normal;
  if (name == "skew-mixture") return ErrorDist::SkewMixture;
  throw Error(ErrorCode::InvalidScenario, "unknown error_dist '" + name + "'");
}

std::string to_string(TrueBeta beta) { return beta == TrueBeta::Sine ? "sine" : "quadratic"; }
std::string to_string(ErrorDist dist) {
  return dist == ErrorDist::Normal ? "normal" : "skew-mixture";
}

void Scenario::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidScenario, msg); };
  if (n < 1) fail("n must be >= 1");
  if (n_grid < 2) fail("n_grid must be >= 2");
  for (double s : {sigma_x, sigma_u, sigma_omega, sigma_e}) {
    if (!(s > 0.0) || !std::isfinite(s)) fail("standard deviations must be positive");
  }
  for (double r : {rho_x, rho_u, rho_omega}) {
    if (!(r >= 0.0 && r < 1.0)) fail("correlations must lie in [0, 1)");
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) fail("delta must be positive");
  if (n_covariates < 0) fail("n_covariates must be >= 0");
  if (n_reps < 1) fail("n_reps must be >= 1");
}

double delta_function(double t, double delta) {
  return 0.5 * delta * (1.0 + std::sin(2.0 * std::numbers::pi * t)) + std::min(delta, 0.02);
}

Eigen::VectorXd true_beta_values(TrueBeta beta, const Grid& grid) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t t = 0; t < grid.size(); ++t) {
    const double s = grid[t];
    out[static_cast<Eigen::Index>(t)] = beta == TrueBeta::Sine
                                            ? std::sin(2.0 * std::numbers::pi * s)
                                            : 4.0 * (s - 0.5) * (s - 0.5);
  }
  return out;
}

namespace {

// Rows with covariance sigma^2 [(1 - rho) I + rho J]: a shared random level
// per row plus independent pointwise noise.
Eigen::MatrixXd exchangeable_noise(Rng& rng, int n, int T, double sigma, double rho) {
  const double common_sd = sigma * std::sqrt(rho);
  const double own_sd = sigma * std::sqrt(1.0 - rho);
  Eigen::MatrixXd out(n, T);
  for (int i = 0; i < n; ++i) {
    const double level = common_sd * rng.normal();
    for (int t = 0; t < T; ++t) out(i, t) = level + own_sd * rng.normal();
  }
  return out;
}

}  // namespace

SimulatedDataset simulate_dataset(const Scenario& scenario, int rep_index, Rng& rng) {
  scenario.validate();
  const int n = scenario.n;
  const int T = scenario.n_grid;
  const Grid grid = equispaced_grid(static_cast<std::size_t>(T));
  const Eigen::VectorXd t = grid.as_vector();
  const Eigen::RowVectorXd mean_curve =
      (2.0 * std::numbers::pi * t).array().sin().matrix().transpose();

  SimulatedDataset out;
  out.beta_true = true_beta_values(scenario.true_beta, grid);
  out.delta_true.resize(T);
  for (int j = 0; j < T; ++j) out.delta_true[j] = delta_function(t[j], scenario.delta);
  out.group.assign(static_cast<std::size_t>(n), 0);

  Eigen::MatrixXd x = exchangeable_noise(rng, n, T, scenario.sigma_x, scenario.rho_x);
  for (int i = 0; i < n; ++i) {
    double sign = 1.0;
    if (scenario.two_groups && i >= n / 2) {
      sign = -1.0;
      out.group[static_cast<std::size_t>(i)] = 1;
    }
    x.row(i) += sign * mean_curve;
  }
  const Eigen::MatrixXd u = exchangeable_noise(rng, n, T, scenario.sigma_u, scenario.rho_u);
  const Eigen::MatrixXd omega =
      exchangeable_noise(rng, n, T, scenario.sigma_omega, scenario.rho_omega);

  out.z.resize(n, scenario.n_covariates);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < scenario.n_covariates; ++j) out.z(i, j) = rng.normal();
  }

  const Eigen::VectorXd w = trapezoid_weights(grid);
  const Eigen::VectorXd signal = x * (w.array() * out.beta_true.array()).matrix();
  out.y.resize(n);
  for (int i = 0; i < n; ++i) {
    double e = 0.0;
    if (scenario.error_dist == ErrorDist::Normal) {
      e = scenario.sigma_e * rng.normal();
    } else {
      const double centre = rng.uniform() < 0.5 ? -0.5 : 0.5;
      e = centre + scenario.sigma_e * std::sqrt(0.5) * rng.normal();
    }
    out.y[i] = signal[i] + e;  // beta_z = 0
  }

  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    ids.push_back("r" + std::to_string(rep_index) + "_" + std::to_string(i + 1));
  }
  const Eigen::MatrixXd m =
      (x.array().rowwise() * out.delta_true.transpose().array()).matrix() + omega;
  out.x = make_dataset(grid, x, ids);
  out.w = make_dataset(grid, x + u, ids);
  out.m = make_dataset(grid, m, ids);
  return out;
}

double MsieEntry::standard_error() const {
  const auto r = static_cast<double>(per_rep.size());
  if (per_rep.size() < 2) return 0.0;
  double mean = 0.0;
  for (const double v : per_rep) mean += v;
  mean /= r;
  double ss = 0.0;
  for (const double v : per_rep) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (r - 1.0) / r);
}

MsieEntry compute_msie(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& truth,
                       const std::string& estimator) {
  const Eigen::Index reps = estimates.rows();
  if (reps < 2) {
    throw Error(ErrorCode::TooFewReplicates, "MSIE needs at least 2 replicates");
  }
  if (estimates.cols() != truth.size()) {
    throw Error(ErrorCode::DimensionMismatch, "estimate curves and truth differ in length");
  }
  const auto grid_n = static_cast<double>(truth.size());
  const Eigen::RowVectorXd mean_curve = estimates.colwise().mean();
  MsieEntry e;
  e.estimator = estimator;
  e.n_reps = static_cast<int>(reps);
  e.abias2 = (mean_curve - truth.transpose()).squaredNorm() / grid_n;
  e.avar = (estimates.rowwise() - mean_curve).squaredNorm() /
           (static_cast<double>(reps) * grid_n);
  e.msie = e.abias2 + e.avar;
  e.per_rep.resize(static_cast<std::size_t>(reps));
  for (Eigen::Index r = 0; r < reps; ++r) {
    e.per_rep[static_cast<std::size_t>(r)] =
        (estimates.row(r) - truth.transpose()).squaredNorm() / grid_n;
  }
  return e;
}

const MsieEntry& MsieReport::entry(const std::string& estimator) const {
  for (const auto& e : entries) {
    if (e.estimator == estimator) return e;
  }
  throw Error(ErrorCode::InvalidConfig, "report has no estimator '" + estimator + "'");
}

Eigen::VectorXd fit_replicate(const SimulatedDataset& data, const std::string& estimator,
                              const StudySettings& settings, Rng& rng) {
  FitMode mode = FitMode::Corrected;
  if (estimator == "naive_w") {
    mode = FitMode::Naive;
  } else if (estimator != "bayes_iv") {
    throw Error(ErrorCode::InvalidConfig, "unknown estimator '" + estimator + "'");
  }
  const Grid& grid = data.w.grid;
  const double bw =
      settings.delta_bandwidth < 0.0 ? default_delta_bandwidth(grid) : settings.delta_bandwidth;
  const DeltaEstimate delta = estimate_delta(data.w, data.m, bw);
  const FunctionalDataset m_star = scale_instrument(data.m, delta);

  ModelInputs inputs;
  inputs.basis = build_bspline_basis(grid, settings.basis_size, settings.degree);
  inputs.y = data.y;
  inputs.z = data.z;
  inputs.w_scores = project(data.w, inputs.basis, ScoreSource::W).scores;
  inputs.m_scores = project(m_star, inputs.basis, ScoreSource::MStar).scores;

  McmcConfig cfg = settings.mcmc;
  cfg.snapshot_factor = 0;
  cfg.keep_allocations = false;
  const PosteriorDraws draws = run_chain(inputs, cfg, rng, mode);
  return reconstruct_function(draws.mean_gamma(), inputs.basis);
}

MsieReport run_study(const Scenario& scenario, const std::vector<std::string>& estimators,
                     const StudySettings& settings) {
  scenario.validate();
  settings.mcmc.validate();
  for (const auto& id : estimators) {
    if (std::find(kEstimatorIds.begin(), kEstimatorIds.end(), id) == kEstimatorIds.end()) {
      throw Error(ErrorCode::InvalidConfig, "unknown estimator '" + id + "'");
    }
  }
  const int reps = scenario.n_reps;
  const auto n_est = estimators.size();
  std::vector<Eigen::MatrixXd> curves(n_est, Eigen::MatrixXd(reps, scenario.n_grid));
  Eigen::VectorXd truth;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(reps));
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  const Rng root(scenario.seed);

  auto worker = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= reps || failed.load()) return;
      try {
        const Rng rep_rng = root.derive(static_cast<std::uint64_t>(r));
        Rng data_rng = rep_rng.derive(0);
        const SimulatedDataset data = simulate_dataset(scenario, r, data_rng);
        for (std::size_t e = 0; e < n_est; ++e) {
          const auto stream = static_cast<std::uint64_t>(
              1 + (std::find(kEstimatorIds.begin(), kEstimatorIds.end(), estimators[e]) -
                   kEstimatorIds.begin()));
          Rng fit_rng = rep_rng.derive(stream);
          curves[e].row(r) = fit_replicate(data, estimators[e], settings, fit_rng).transpose();
        }
      } catch (const Error& err) {
        errors[static_cast<std::size_t>(r)] = std::make_exception_ptr(
            Error(err.code(), "replicate " + std::to_string(r) + ": " + err.what()));
        failed.store(true);
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
        failed.store(true);
      }
    }
  };

  unsigned threads = settings.threads == 0 ? std::thread::hardware_concurrency() : settings.threads;
  threads = std::max(1u, std::min(threads, static_cast<unsigned>(reps)));
  {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  truth = true_beta_values(scenario.true_beta,
                           equispaced_grid(static_cast<std::size_t>(scenario.n_grid)));
  MsieReport report;
  report.scenario = scenario;
  for (std::size_t e = 0; e < n_est; ++e) {
    report.entries.push_back(compute_msie(curves[e], truth, estimators[e]));
  }
  return report;
}

}  // namespace sofri
