#include "sofri/posterior.hpp"

#include "sofri/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace sofri {

namespace {

void require_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "credible level must lie in (0, 1)");
  }
}

void require_draws(const PosteriorDraws& draws) {
  if (draws.draw_count() < 2) {
    throw Error(ErrorCode::TooFewDraws, "summaries need at least 2 posterior draws");
  }
}

}  // namespace

std::pair<double, double> equal_tailed_interval(std::vector<double> values, double level);

namespace {

// For very skewed samples the mean can sit outside the equal-tailed interval;
// widen just enough to keep lower <= mean <= upper.
std::pair<double, double> bounds_around(std::vector<double> values, double mean, double level) {
  auto [lo, hi] = equal_tailed_interval(std::move(values), level);
  return {std::min(lo, mean), std::max(hi, mean)};
}

}  // namespace

std::pair<double, double> equal_tailed_interval(std::vector<double> values, double level) {
  require_level(level);
  const std::size_t n = values.size();
  if (n == 0) throw Error(ErrorCode::TooFewDraws, "interval of an empty sample");
  std::sort(values.begin(), values.end());
  const double tail = 0.5 * (1.0 - level) * static_cast<double>(n);
  auto j = static_cast<std::size_t>(std::ceil(tail - 1e-9));
  j = std::clamp<std::size_t>(j, 1, (n + 1) / 2);
  return {values[j - 1], values[n - j]};
}

FunctionalSummary summarize_beta(const PosteriorDraws& draws, const BasisSystem& basis,
                                 double level) {
  require_draws(draws);
  require_level(level);
  const Eigen::Index T = basis.values.rows();
  const auto D = draws.draw_count();
  Eigen::MatrixXd curves(T, static_cast<Eigen::Index>(D));
  for (std::size_t d = 0; d < D; ++d) {
    curves.col(static_cast<Eigen::Index>(d)) = reconstruct_function(draws.draws[d].gamma, basis);
  }
  FunctionalSummary out;
  out.grid = basis.grid;
  out.level = level;
  out.mean = curves.rowwise().mean();
  out.lower.resize(T);
  out.upper.resize(T);
  std::vector<double> row(D);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (std::size_t d = 0; d < D; ++d) row[d] = curves(t, static_cast<Eigen::Index>(d));
    std::tie(out.lower[t], out.upper[t]) = bounds_around(row, out.mean[t], level);
  }
  return out;
}

std::vector<ScalarSummary> summarize_scalars(const PosteriorDraws& draws, double level) {
  require_draws(draws);
  require_level(level);
  const auto D = draws.draw_count();
  auto summarize = [&](std::string name, auto&& get) {
    std::vector<double> v(D);
    double sum = 0.0;
    for (std::size_t d = 0; d < D; ++d) {
      v[d] = get(draws.draws[d]);
      sum += v[d];
    }
    ScalarSummary s;
    s.name = std::move(name);
    s.mean = sum / static_cast<double>(D);
    std::tie(s.lower, s.upper) = bounds_around(std::move(v), s.mean, level);
    return s;
  };
  std::vector<ScalarSummary> out;
  out.push_back(summarize("alpha0", [](const Draw& d) { return d.alpha0; }));
  for (int j = 0; j < draws.n_covariates; ++j) {
    out.push_back(summarize("beta_z_" + std::to_string(j + 1),
                            [j](const Draw& d) { return d.beta_z[j]; }));
  }
  out.push_back(summarize("tau", [](const Draw& d) { return d.tau; }));
  return out;
}

Eigen::MatrixXd similarity_matrix(const PosteriorDraws& draws) {
  const int n = draws.n_obs;
  std::size_t used = 0;
  std::vector<std::uint32_t> together(static_cast<std::size_t>(n) * n, 0);
  std::vector<std::vector<int>> groups;
  for (const auto& d : draws.draws) {
    if (d.x_allocations.empty()) continue;
    if (static_cast<int>(d.x_allocations.size()) != n) {
      throw Error(ErrorCode::DimensionMismatch, "allocation snapshot has the wrong length");
    }
    ++used;
    groups.assign(static_cast<std::size_t>(draws.x_components), {});
    for (int i = 0; i < n; ++i) {
      groups[static_cast<std::size_t>(d.x_allocations[static_cast<std::size_t>(i)])].push_back(i);
    }
    for (const auto& g : groups) {
      for (std::size_t a = 0; a < g.size(); ++a) {
        const std::size_t row = static_cast<std::size_t>(g[a]) * n;
        for (std::size_t b = a; b < g.size(); ++b) ++together[row + g[b]];
      }
    }
  }
  if (used == 0) {
    throw Error(ErrorCode::NoAllocationSnapshots, "draws carry no latent allocations");
  }
  Eigen::MatrixXd s(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = static_cast<double>(together[static_cast<std::size_t>(i) * n + j]) /
                       static_cast<double>(used);
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return s;
}

std::vector<int> average_linkage(const Eigen::MatrixXd& distance, int n_clusters) {
  const auto n = static_cast<int>(distance.rows());
  std::vector<int> labels(static_cast<std::size_t>(n), 1);
  if (n == 0) return labels;
  n_clusters = std::clamp(n_clusters, 1, n);

  Eigen::MatrixXd d = distance;
  std::vector<int> size(static_cast<std::size_t>(n), 1);
  std::vector<bool> active(static_cast<std::size_t>(n), true);
  std::vector<int> root(static_cast<std::size_t>(n));
  std::iota(root.begin(), root.end(), 0);
  std::vector<int> nn(static_cast<std::size_t>(n), -1);
  std::vector<double> nn_dist(static_cast<std::size_t>(n),
                              std::numeric_limits<double>::infinity());

  auto refresh = [&](int i) {
    nn[i] = -1;
    nn_dist[i] = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
      if (k != i && active[k] && d(i, k) < nn_dist[i]) {
        nn_dist[i] = d(i, k);
        nn[i] = k;
      }
    }
  };
  for (int i = 0; i < n; ++i) refresh(i);

  for (int remaining = n; remaining > n_clusters; --remaining) {
    int a = -1;
    for (int i = 0; i < n; ++i) {
      if (active[i] && nn[i] >= 0 && (a < 0 || nn_dist[i] < nn_dist[a])) a = i;
    }
    int b = nn[a];
    if (b < a) std::swap(a, b);
    // merge b into a
    const double wa = size[a];
    const double wb = size[b];
    for (int k = 0; k < n; ++k) {
      if (!active[k] || k == a || k == b) continue;
      const double v = (wa * d(a, k) + wb * d(b, k)) / (wa + wb);
      d(a, k) = v;
      d(k, a) = v;
    }
    size[a] += size[b];
    active[b] = false;
    for (int i = 0; i < n; ++i) {
      if (root[i] == b) root[i] = a;
    }
    for (int k = 0; k < n; ++k) {
      if (!active[k]) continue;
      if (k == a || nn[k] == a || nn[k] == b) {
        refresh(k);
      } else if (d(k, a) < nn_dist[k]) {
        nn_dist[k] = d(k, a);
        nn[k] = a;
      }
    }
  }

  // relabel: larger clusters first, ties by smallest member
  std::map<int, std::pair<int, int>> info;  // root -> (size, first member)
  for (int i = 0; i < n; ++i) {
    auto [it, inserted] = info.try_emplace(root[i], 0, i);
    ++it->second.first;
  }
  std::vector<std::pair<int, int>> order;  // (root, rank key)
  for (const auto& [r, si] : info) order.emplace_back(r, 0);
  std::sort(order.begin(), order.end(), [&](const auto& x, const auto& y) {
    const auto& ix = info[x.first];
    const auto& iy = info[y.first];
    if (ix.first != iy.first) return ix.first > iy.first;
    return ix.second < iy.second;
  });
  std::map<int, int> label_of;
  for (std::size_t c = 0; c < order.size(); ++c) {
    label_of[order[c].first] = static_cast<int>(c) + 1;
  }
  for (int i = 0; i < n; ++i) labels[i] = label_of[root[i]];
  return labels;
}

namespace {

int modal_occupied_components(const PosteriorDraws& draws) {
  std::map<int, int> freq;
  for (const auto& d : draws.draws) {
    if (d.x_allocations.empty()) continue;
    std::vector<bool> seen(static_cast<std::size_t>(draws.x_components), false);
    int occupied = 0;
    for (const int z : d.x_allocations) {
      if (!seen[static_cast<std::size_t>(z)]) {
        seen[static_cast<std::size_t>(z)] = true;
        ++occupied;
      }
    }
    ++freq[occupied];
  }
  int best = 1;
  int best_count = -1;
  for (const auto& [k, c] : freq) {
    if (c > best_count) {  // ties resolve to the smaller count
      best = k;
      best_count = c;
    }
  }
  return best;
}

Eigen::VectorXd cluster_mean_scores(const Eigen::MatrixXd& scores, const std::vector<int>& labels,
                                    int label) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(scores.cols());
  int count = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) {
      acc += scores.row(static_cast<Eigen::Index>(i)).transpose();
      ++count;
    }
  }
  return count > 0 ? Eigen::VectorXd(acc / count) : acc;
}

}  // namespace

ClusterResult extract_clusters(const PosteriorDraws& draws, const BasisSystem& basis) {
  if (draws.snapshots.empty()) {
    throw Error(ErrorCode::NoAllocationSnapshots, "draws carry no latent-score snapshots");
  }
  const Eigen::MatrixXd sim = similarity_matrix(draws);
  const int target = modal_occupied_components(draws);

  ClusterResult out;
  out.truncation = draws.x_components;
  const Eigen::MatrixXd dist = (1.0 - sim.array()).matrix();
  out.labels = average_linkage(dist, target);
  out.n_clusters = *std::max_element(out.labels.begin(), out.labels.end());
  out.sizes.assign(static_cast<std::size_t>(out.n_clusters), 0);
  for (const int l : out.labels) ++out.sizes[static_cast<std::size_t>(l - 1)];

  Eigen::MatrixXd mean_scores = Eigen::MatrixXd::Zero(draws.n_obs, draws.n_basis);
  for (const auto& s : draws.snapshots) mean_scores += s.scores;
  mean_scores /= static_cast<double>(draws.snapshots.size());

  out.cluster_mean_curves.resize(out.n_clusters, basis.values.rows());
  for (int c = 1; c <= out.n_clusters; ++c) {
    out.cluster_mean_curves.row(c - 1) =
        curve_from_scores(cluster_mean_scores(mean_scores, out.labels, c), basis).transpose();
  }
  return out;
}

ContrastSummary cluster_contrast(const PosteriorDraws& draws, const ClusterResult& clusters,
                                 int cluster_a, int cluster_b, const BasisSystem& basis,
                                 double level) {
  require_draws(draws);
  for (const int c : {cluster_a, cluster_b}) {
    if (c < 1 || c > clusters.n_clusters || clusters.sizes[static_cast<std::size_t>(c - 1)] == 0) {
      throw Error(ErrorCode::EmptyCluster, "cluster " + std::to_string(c) + " is empty");
    }
  }
  if (draws.snapshots.empty()) {
    throw Error(ErrorCode::NoAllocationSnapshots, "draws carry no latent-score snapshots");
  }
  // snapshot indices per chain, in iteration order
  std::map<int, std::vector<std::size_t>> by_chain;
  for (std::size_t s = 0; s < draws.snapshots.size(); ++s) {
    by_chain[draws.snapshots[s].chain].push_back(s);
  }
  for (auto& [chain, idx] : by_chain) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
      return draws.snapshots[x].iteration < draws.snapshots[y].iteration;
    });
  }
  std::map<std::size_t, std::pair<Eigen::VectorXd, Eigen::VectorXd>> curves;
  auto curves_for = [&](std::size_t s) -> const std::pair<Eigen::VectorXd, Eigen::VectorXd>& {
    auto it = curves.find(s);
    if (it == curves.end()) {
      const Eigen::MatrixXd& scores = draws.snapshots[s].scores;
      it = curves
               .emplace(s, std::make_pair(
                               curve_from_scores(
                                   cluster_mean_scores(scores, clusters.labels, cluster_a), basis),
                               curve_from_scores(
                                   cluster_mean_scores(scores, clusters.labels, cluster_b), basis)))
               .first;
    }
    return it->second;
  };

  ContrastSummary out;
  out.values.reserve(draws.draw_count());
  double sum = 0.0;
  for (const auto& d : draws.draws) {
    auto chain_it = by_chain.find(d.chain);
    if (chain_it == by_chain.end()) chain_it = by_chain.begin();
    const auto& idx = chain_it->second;
    std::size_t best = idx.front();
    int best_gap = std::numeric_limits<int>::max();
    for (const std::size_t s : idx) {
      const int gap = std::abs(draws.snapshots[s].iteration - d.iteration);
      if (gap < best_gap) {
        best_gap = gap;
        best = s;
      }
    }
    const auto& [xa, xb] = curves_for(best);
    const Eigen::VectorXd beta = reconstruct_function(d.gamma, basis);
    const Eigen::VectorXd gap = xa - xb;
    double v = 0.0;
    for (Eigen::Index t = 0; t < gap.size(); ++t) v += basis.quad_weights[t] * beta[t] * gap[t];
    out.values.push_back(v);
    sum += v;
  }
  out.mean = sum / static_cast<double>(out.values.size());
  std::tie(out.lower, out.upper) = bounds_around(out.values, out.mean, level);
  return out;
}

}  // namespace sofri
