#include "sofri/model.hpp"

#include "sofri/error.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <thread>
#include <unordered_map>

namespace sofri {

void ModelInputs::validate() const {
  const Eigen::Index n = y.size();
  if (n == 0) throw Error(ErrorCode::DimensionMismatch, "model needs at least one observation");
  if (z.rows() != n || w_scores.rows() != n || m_scores.rows() != n) {
    throw Error(ErrorCode::DimensionMismatch, "row counts of Y, Z, W and M scores disagree");
  }
  if (w_scores.cols() != basis.size() || m_scores.cols() != basis.size()) {
    throw Error(ErrorCode::DimensionMismatch, "score columns do not match the basis size");
  }
  if (!y.allFinite() || !z.allFinite() || !w_scores.allFinite() || !m_scores.allFinite()) {
    throw Error(ErrorCode::DomainError, "model inputs contain non-finite values");
  }
  if (z.cols() > 0) {
    Eigen::MatrixXd design(n, z.cols() + 1);
    design << Eigen::VectorXd::Ones(n), z;
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < design.cols()) {
      throw Error(ErrorCode::RankDeficientZ,
                  "[1, Z] has rank " + std::to_string(qr.rank()) + " < " +
                      std::to_string(design.cols()));
    }
  }
}

void McmcConfig::validate() const {
  if (!(n_iter > burn_in) || burn_in < 0) {
    throw Error(ErrorCode::InvalidConfig, "need n_iter > burn_in >= 0");
  }
  if (thin < 1) throw Error(ErrorCode::InvalidConfig, "thin must be >= 1");
  if (n_chains < 1) throw Error(ErrorCode::InvalidConfig, "n_chains must be >= 1");
  for (const auto* m : {&eps, &u, &omega, &x}) {
    if (m->components < 1) throw Error(ErrorCode::InvalidConfig, "mixture truncation must be >= 1");
    if (!(m->concentration > 0.0)) {
      throw Error(ErrorCode::NonPositiveConcentration, "mixture concentration must be > 0");
    }
  }
  if (!(eps_prior.kappa > 0.0) || !(eps_prior.shape > 0.0) || !(eps_prior.rate > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "NIG hyperparameters must be positive");
  }
  for (const auto* p : {&u_prior, &omega_prior, &x_prior}) {
    if (!(p->kappa0 > 0.0)) throw Error(ErrorCode::InvalidConfig, "NIW kappa0 must be > 0");
    if (!(p->dof_offset > -1.0)) {
      throw Error(ErrorCode::InvalidDegreesOfFreedom, "NIW dof_offset must exceed -1");
    }
  }
  if (!(tau_shape > 0.0) || !(tau_scale > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "tau prior parameters must be positive");
  }
  if (snapshot_factor < 0) throw Error(ErrorCode::InvalidConfig, "snapshot_factor must be >= 0");
}

void McmcState::check() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::NumericalFailure, "smoothing variance tau left (0, inf)");
  }
  if (!std::isfinite(alpha0) || !gamma.allFinite() || !beta_z.allFinite() ||
      !latent.allFinite()) {
    throw Error(ErrorCode::NumericalFailure, "non-finite regression parameters");
  }
  eps.check();
  u.check();
  omega.check();
  x.check();
}

Eigen::VectorXd PosteriorDraws::mean_gamma() const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n_basis);
  for (const auto& d : draws) acc += d.gamma;
  return draws.empty() ? acc : Eigen::VectorXd(acc / static_cast<double>(draws.size()));
}

namespace {

// Lloyd's algorithm with k-means++ seeding; rows of `data` are points.
std::vector<int> kmeans(const Eigen::MatrixXd& data, int k, Rng& rng, int max_iter = 25) {
  const Eigen::Index n = data.rows();
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  if (k <= 1 || n == 0) return labels;
  Eigen::MatrixXd centers(k, data.cols());
  std::vector<double> dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  centers.row(0) = data.row(static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(n)) % n);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], (data.row(i) - centers.row(c - 1)).squaredNorm());
      total += dist[i];
    }
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (pick = 0; pick + 1 < n; ++pick) {
        target -= dist[pick];
        if (target <= 0.0) break;
      }
    }
    centers.row(c) = data.row(pick);
  }
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (data.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, data.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels[i]) += data.row(i);
      ++counts[labels[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) centers.row(c) = sums.row(c) / counts[c];
    }
    if (!changed && iter > 0) break;
  }
  return labels;
}

double mean_column_variance(const Eigen::MatrixXd& m) {
  if (m.rows() < 2) return 0.0;
  const Eigen::RowVectorXd mu = m.colwise().mean();
  return (m.rowwise() - mu).squaredNorm() / static_cast<double>((m.rows() - 1) * m.cols());
}

NiwParams make_niw_prior(const MvPriorSettings& s, int dim, double empirical_scale) {
  NiwParams p;
  p.mean = Eigen::VectorXd::Zero(dim);
  p.kappa = s.kappa0;
  p.dof = dim + s.dof_offset;
  const double scale = s.scale > 0.0 ? s.scale : empirical_scale;
  p.scale = Eigen::MatrixXd::Identity(dim, dim) * scale;
  return p;
}

Eigen::VectorXd initial_weights(const std::vector<int>& counts, double concentration) {
  const auto k = static_cast<Eigen::Index>(counts.size());
  Eigen::VectorXd w(k);
  double total = 0.0;
  for (Eigen::Index c = 0; c < k; ++c) {
    w[c] = counts[c] + concentration / static_cast<double>(k);
    total += w[c];
  }
  return w / total;
}

void init_scalar_block(ScalarMixtureBlock& block, const Eigen::VectorXd& residuals, Rng& rng) {
  const int k_comp = block.n_components();
  block.allocations = kmeans(Eigen::MatrixXd(residuals), k_comp, rng);
  const auto counts = component_counts(block.allocations, k_comp);
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(k_comp);
  for (Eigen::Index i = 0; i < residuals.size(); ++i) sums[block.allocations[i]] += residuals[i];
  Eigen::VectorXd ss = Eigen::VectorXd::Zero(k_comp);
  for (int c = 0; c < k_comp; ++c) {
    block.means[c] = counts[c] > 0 ? sums[c] / counts[c] : block.prior.mean;
  }
  for (Eigen::Index i = 0; i < residuals.size(); ++i) {
    const int c = block.allocations[i];
    ss[c] += (residuals[i] - block.means[c]) * (residuals[i] - block.means[c]);
  }
  for (int c = 0; c < k_comp; ++c) {
    block.variances[c] = (2.0 * block.prior.rate + ss[c]) / (2.0 * block.prior.shape + counts[c]);
  }
  block.weights = initial_weights(counts, block.concentration);
}

void init_mv_block(MvMixtureBlock& block, const Eigen::MatrixXd& residuals, Rng& rng) {
  const int k_comp = block.n_components();
  const int dim = block.dim();
  block.allocations = kmeans(residuals, k_comp, rng);
  const auto counts = component_counts(block.allocations, k_comp);
  for (int c = 0; c < k_comp; ++c) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index i = 0; i < residuals.rows(); ++i) {
      if (block.allocations[i] == c) mean += residuals.row(i).transpose();
    }
    mean = counts[c] > 0 ? Eigen::VectorXd(mean / counts[c]) : block.prior.mean;
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index i = 0; i < residuals.rows(); ++i) {
      if (block.allocations[i] == c) {
        const Eigen::VectorXd d = residuals.row(i).transpose() - mean;
        scatter.selfadjointView<Eigen::Lower>().rankUpdate(d);
      }
    }
    scatter = scatter.selfadjointView<Eigen::Lower>();
    const double denom = std::max(block.prior.dof + counts[c] - dim - 1.0, 1.0);
    auto& comp = block.components[static_cast<std::size_t>(c)];
    comp.mean = mean;
    comp.set_cov((block.prior.scale + scatter) / denom);
  }
  block.weights = initial_weights(counts, block.concentration);
}

// Moment estimates of the two error covariances: Cov(W) - C and Cov(M) - C with
// C the symmetrized cross-covariance, eigenvalues clipped to a small floor.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> moment_error_covariances(const Eigen::MatrixXd& w,
                                                                     const Eigen::MatrixXd& m) {
  const auto n = static_cast<double>(w.rows());
  const Eigen::MatrixXd wc = w.rowwise() - w.colwise().mean();
  const Eigen::MatrixXd mc = m.rowwise() - m.colwise().mean();
  const double denom = std::max(n - 1.0, 1.0);
  const Eigen::MatrixXd cross = (wc.transpose() * mc + mc.transpose() * wc) / (2.0 * denom);
  const Eigen::MatrixXd cov_w = wc.transpose() * wc / denom;
  const Eigen::MatrixXd cov_m = mc.transpose() * mc / denom;
  const double floor_value =
      1e-6 * std::max((cov_w.trace() + cov_m.trace()) / (2.0 * static_cast<double>(w.cols())), 1e-12);
  auto clip = [floor_value](const Eigen::MatrixXd& a) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (a + a.transpose()));
    const Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(floor_value);
    return Eigen::MatrixXd(eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose());
  };
  return {clip(cov_w - cross), clip(cov_m - cross)};
}

}  // namespace

Eigen::MatrixXd initial_latent_scores(const Eigen::MatrixXd& w_scores,
                                      const Eigen::MatrixXd& m_scores) {
  if (w_scores.rows() < 2) return 0.5 * (w_scores + m_scores);
  const auto [cov_u, cov_w] = moment_error_covariances(w_scores, m_scores);
  const Eigen::LLT<Eigen::MatrixXd> lu(cov_u);
  const Eigen::LLT<Eigen::MatrixXd> lw(cov_w);
  const Eigen::MatrixXd prec_u = lu.solve(Eigen::MatrixXd::Identity(cov_u.rows(), cov_u.cols()));
  const Eigen::MatrixXd prec_w = lw.solve(Eigen::MatrixXd::Identity(cov_w.rows(), cov_w.cols()));
  const Eigen::LLT<Eigen::MatrixXd> total(prec_u + prec_w);
  // (P_u + P_w)^{-1} (P_u w_i + P_w m_i), written as a correction to m_i so
  // that identical inputs come back unchanged
  const Eigen::MatrixXd gap = (w_scores - m_scores).transpose();
  return m_scores + total.solve(prec_u * gap).transpose();
}

namespace {

struct PairHash {
  std::size_t operator()(long long key) const noexcept { return std::hash<long long>{}(key); }
};

}  // namespace

Eigen::VectorXd response_residuals(const McmcState& state, const ModelInputs& inputs) {
  Eigen::VectorXd r = inputs.y - state.latent * state.gamma;
  r.array() -= state.alpha0;
  if (inputs.z.cols() > 0) r -= inputs.z * state.beta_z;
  return r;
}

McmcState initialize(const ModelInputs& inputs, const McmcConfig& config, Rng& rng,
                     FitMode mode) {
  inputs.validate();
  config.validate();
  const Eigen::Index n = inputs.n_obs();
  const Eigen::Index p = inputs.n_covariates();
  const int K = inputs.basis.size();

  McmcState s;
  s.latent = mode == FitMode::Naive ? inputs.w_scores
                                    : initial_latent_scores(inputs.w_scores, inputs.m_scores);

  // gamma: ridge on centered data with the difference penalty as ridge matrix
  const Eigen::RowVectorXd x_mean = s.latent.colwise().mean();
  const Eigen::MatrixXd xc = s.latent.rowwise() - x_mean;
  const Eigen::VectorXd yc = inputs.y.array() - inputs.y.mean();
  Eigen::MatrixXd lhs = xc.transpose() * xc + inputs.basis.penalty;
  lhs.diagonal().array() += 1e-8 * std::max(1.0, lhs.diagonal().mean());
  s.gamma = lhs.ldlt().solve(xc.transpose() * yc);

  // alpha0, beta_z: least squares of the remaining residual on [1, Z]
  const Eigen::VectorXd partial = inputs.y - s.latent * s.gamma;
  if (p == 0) {
    s.beta_z = Eigen::VectorXd::Zero(0);
    s.alpha0 = partial.mean();
  } else {
    Eigen::MatrixXd design(n, p + 1);
    design << Eigen::VectorXd::Ones(n), inputs.z;
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < p + 1) {
      throw Error(ErrorCode::RankDeficientZ, "[1, Z] is rank deficient");
    }
    const Eigen::VectorXd coef = qr.solve(partial);
    s.alpha0 = coef[0];
    s.beta_z = coef.tail(p);
  }
  s.tau = 1.0;

  s.eps = make_scalar_block(config.eps.components, config.eps.concentration, config.eps_prior,
                            static_cast<std::size_t>(n));
  init_scalar_block(s.eps, response_residuals(s, inputs), rng);
  s.alpha0 += recenter(s.eps);

  const Eigen::MatrixXd u_res = inputs.w_scores - s.latent;
  const Eigen::MatrixXd w_res = inputs.m_scores - s.latent;
  const double floor_scale =
      std::max(1e-6 * mean_column_variance(inputs.w_scores), 1e-12);
  s.u = make_mv_block(config.u.components, config.u.concentration,
                      make_niw_prior(config.u_prior, K,
                                     std::max(mean_column_variance(u_res), floor_scale)),
                      static_cast<std::size_t>(n));
  s.omega = make_mv_block(config.omega.components, config.omega.concentration,
                          make_niw_prior(config.omega_prior, K,
                                         std::max(mean_column_variance(w_res), floor_scale)),
                          static_cast<std::size_t>(n));
  s.x = make_mv_block(config.x.components, config.x.concentration,
                      make_niw_prior(config.x_prior, K,
                                     std::max(mean_column_variance(s.latent), floor_scale)),
                      static_cast<std::size_t>(n));
  if (mode == FitMode::Corrected) {
    init_mv_block(s.u, u_res, rng);
    init_mv_block(s.omega, w_res, rng);
    recenter(s.u);
    recenter(s.omega);
  }
  init_mv_block(s.x, s.latent, rng);
  return s;
}

void update_error_mixture(McmcState& state, const ModelInputs& inputs, Rng& rng) {
  const Eigen::VectorXd r = response_residuals(state, inputs);
  const double shift = gibbs_update_scalar_mixture(
      state.eps, std::span<const double>(r.data(), static_cast<std::size_t>(r.size())), rng,
      true);
  state.alpha0 += shift;
}

void update_measurement_mixtures(McmcState& state, const ModelInputs& inputs, Rng& rng) {
  gibbs_update_mv_mixture(state.u, inputs.w_scores - state.latent, rng, false);
  gibbs_update_mv_mixture(state.omega, inputs.m_scores - state.latent, rng, false);

  // Zero the U mixture mean by moving along the direction the likelihood
  // cannot see: X + s, U and Omega means - s. W and M residuals are unchanged,
  // the x block follows the scores and alpha0 keeps the fitted values fixed.
  // Recentering U and Omega separately would fight the data whenever
  // E[M*] != E[W] (an imperfect delta-hat) and lets the scores drift.
  const Eigen::VectorXd shift = recenter(state.u);
  for (auto& c : state.omega.components) c.mean -= shift;
  for (auto& c : state.x.components) c.mean += shift;
  state.latent.rowwise() += shift.transpose();
  state.alpha0 -= state.gamma.dot(shift);
}

void update_latent_mixture(McmcState& state, Rng& rng) {
  gibbs_update_mv_mixture(state.x, state.latent, rng, false);
}

void update_latent_scores(McmcState& state, const ModelInputs& inputs, Rng& rng) {
  const Eigen::Index n = inputs.n_obs();
  const int K = inputs.basis.size();
  const int kw = state.omega.n_components();
  const int kx = state.x.n_components();
  const int ke = state.eps.n_components();

  // Lambda * mu for each component, reused across observations
  auto weighted_means = [](const MvMixtureBlock& b) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(b.components.size());
    for (const auto& c : b.components) out.push_back(c.precision * c.mean);
    return out;
  };
  const auto u_lm = weighted_means(state.u);
  const auto w_lm = weighted_means(state.omega);
  const auto x_lm = weighted_means(state.x);

  Eigen::VectorXd offset = inputs.y.array() - state.alpha0;
  if (inputs.z.cols() > 0) offset -= inputs.z * state.beta_z;

  std::unordered_map<long long, Eigen::LLT<Eigen::MatrixXd>, PairHash> cache;
  Eigen::MatrixXd prec(K, K);
  Eigen::VectorXd lin(K);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int zu = state.u.allocations[i];
    const int zw = state.omega.allocations[i];
    const int zx = state.x.allocations[i];
    const int ze = state.eps.allocations[i];
    const double inv_var = 1.0 / state.eps.variances[ze];
    const long long key = ((static_cast<long long>(zu) * kw + zw) * kx + zx) * ke + ze;

    auto it = cache.find(key);
    if (it == cache.end()) {
      prec = state.u.components[zu].precision + state.omega.components[zw].precision +
             state.x.components[zx].precision;
      prec.noalias() += inv_var * state.gamma * state.gamma.transpose();
      Eigen::LLT<Eigen::MatrixXd> llt(prec);
      if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::NumericalFailure,
                    "latent-score precision is not SPD for observation " + std::to_string(i));
      }
      it = cache.emplace(key, std::move(llt)).first;
    }
    lin.noalias() = state.u.components[zu].precision * inputs.w_scores.row(i).transpose();
    lin.noalias() += state.omega.components[zw].precision * inputs.m_scores.row(i).transpose();
    lin -= u_lm[zu] + w_lm[zw];
    lin += x_lm[zx];
    lin += ((offset[i] - state.eps.means[ze]) * inv_var) * state.gamma;
    state.latent.row(i) = sample_mvn_canonical(rng, it->second, lin).transpose();
  }
}

void update_regression(McmcState& state, const ModelInputs& inputs, Rng& rng) {
  const Eigen::Index n = inputs.n_obs();
  const Eigen::Index p = inputs.n_covariates();
  const int K = inputs.basis.size();
  const Eigen::Index q = 1 + p + K;

  Eigen::MatrixXd design(n, q);
  design.col(0).setOnes();
  if (p > 0) design.middleCols(1, p) = inputs.z;
  design.rightCols(K) = state.latent;

  Eigen::VectorXd weights(n);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int ze = state.eps.allocations[i];
    weights[i] = 1.0 / state.eps.variances[ze];
    target[i] = inputs.y[i] - state.eps.means[ze];
  }
  const Eigen::MatrixXd weighted = weights.asDiagonal() * design;
  Eigen::MatrixXd prec = design.transpose() * weighted;
  prec.bottomRightCorner(K, K) += inputs.basis.penalty / state.tau;
  const Eigen::VectorXd lin = weighted.transpose() * target;
  const Eigen::LLT<Eigen::MatrixXd> llt(prec);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure, "regression conditional precision is not SPD");
  }
  const Eigen::VectorXd theta = sample_mvn_canonical(rng, llt, lin);
  state.alpha0 = theta[0];
  state.beta_z = theta.segment(1, p);
  state.gamma = theta.tail(K);
}

void update_smoothing(McmcState& state, const ModelInputs& inputs, const McmcConfig& config,
                      Rng& rng) {
  const double quad = state.gamma.dot(inputs.basis.penalty * state.gamma);
  const double shape = config.tau_shape + 0.5 * inputs.basis.penalty_rank();
  const double scale = config.tau_scale + 0.5 * quad;
  state.tau = rng.inverse_gamma(shape, scale);
}

void sweep(McmcState& state, const ModelInputs& inputs, const McmcConfig& config, Rng& rng,
           FitMode mode) {
  update_error_mixture(state, inputs, rng);
  if (mode == FitMode::Corrected) {
    update_measurement_mixtures(state, inputs, rng);
    update_latent_mixture(state, rng);
    update_latent_scores(state, inputs, rng);
  }
  update_regression(state, inputs, rng);
  update_smoothing(state, inputs, config, rng);
#ifndef NDEBUG
  state.check();
#endif
}

PosteriorDraws run_chain(const ModelInputs& inputs, const McmcConfig& config, Rng& rng,
                         FitMode mode, int chain_index) {
  McmcState state = initialize(inputs, config, rng, mode);
  PosteriorDraws out;
  out.n_obs = static_cast<int>(inputs.n_obs());
  out.n_basis = inputs.basis.size();
  out.n_covariates = static_cast<int>(inputs.n_covariates());
  out.x_components = config.x.components;
  out.draws.reserve(static_cast<std::size_t>(config.draws_per_chain()));

  int retained = 0;
  for (int it = 1; it <= config.n_iter; ++it) {
    try {
      sweep(state, inputs, config, rng, mode);
    } catch (const Error& e) {
      throw Error(e.code(), "iteration " + std::to_string(it) + " of chain " +
                                std::to_string(chain_index) + ": " + e.what());
    }
    if (it <= config.burn_in || (it - config.burn_in) % config.thin != 0) continue;
    Draw d;
    d.chain = chain_index;
    d.iteration = it;
    d.alpha0 = state.alpha0;
    d.beta_z = state.beta_z;
    d.gamma = state.gamma;
    d.tau = state.tau;
    if (config.keep_allocations) d.x_allocations = state.x.allocations;
    out.draws.push_back(std::move(d));
    if (config.snapshot_factor > 0 && retained % config.snapshot_factor == 0) {
      out.snapshots.push_back({chain_index, it, state.latent});
    }
    ++retained;
  }
  return out;
}

PosteriorDraws run_chains(const ModelInputs& inputs, const McmcConfig& config, FitMode mode) {
  config.validate();
  const Rng root(config.seed);
  std::vector<PosteriorDraws> results(static_cast<std::size_t>(config.n_chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(config.n_chains));
  {
    std::vector<std::jthread> workers;
    for (int c = 0; c < config.n_chains; ++c) {
      workers.emplace_back([&, c] {
        try {
          Rng rng = root.derive(static_cast<std::uint64_t>(c));
          results[c] = run_chain(inputs, config, rng, mode, c);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  PosteriorDraws merged = std::move(results.front());
  for (std::size_t c = 1; c < results.size(); ++c) {
    for (auto& d : results[c].draws) merged.draws.push_back(std::move(d));
    for (auto& s : results[c].snapshots) merged.snapshots.push_back(std::move(s));
  }
  return merged;
}

PosteriorDraws fit_naive(const ModelInputs& inputs, const McmcConfig& config, Rng& rng) {
  return run_chain(inputs, config, rng, FitMode::Naive);
}

}  // namespace sofri
