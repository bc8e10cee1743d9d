#pragma once

#include "sofri/delta.hpp"
#include "sofri/error.hpp"
#include "sofri/fda.hpp"
#include "sofri/model.hpp"
#include "sofri/simulate.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

// Fails unless `expr` throws sofri::Error carrying `expected_code`.
#define CHECK_THROWS_CODE(expr, expected_code)                   \
  do {                                                           \
    bool thrown_ = false;                                        \
    try {                                                        \
      static_cast<void>(expr);                                   \
    } catch (const sofri::Error& err_) {                         \
      thrown_ = true;                                            \
      CHECK(err_.code() == (expected_code));                     \
    }                                                            \
    CHECK_MESSAGE(thrown_, "expected a sofri::Error");           \
  } while (false)

namespace sofri::testing {

struct SampleMoments {
  double mean = 0.0;
  double var = 0.0;
  double se() const { return std::sqrt(var / static_cast<double>(count)); }
  std::size_t count = 0;
};

inline SampleMoments moments(const std::vector<double>& v) {
  SampleMoments m;
  m.count = v.size();
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(v.size() - 1);
  return m;
}

/// Simulated scenario projected to scores, ready for the sampler.
struct Problem {
  SimulatedDataset data;
  ModelInputs inputs;
};

inline Problem make_problem(Scenario scenario, std::uint64_t seed, int basis_size = 10) {
  Problem p;
  Rng rng(seed);
  p.data = simulate_dataset(scenario, 0, rng);
  const DeltaEstimate delta =
      estimate_delta(p.data.w, p.data.m, default_delta_bandwidth(p.data.w.grid));
  const FunctionalDataset m_star = scale_instrument(p.data.m, delta);
  p.inputs.basis = build_bspline_basis(p.data.w.grid, basis_size, 3);
  p.inputs.y = p.data.y;
  p.inputs.z = p.data.z;
  p.inputs.w_scores = project(p.data.w, p.inputs.basis).scores;
  p.inputs.m_scores = project(m_star, p.inputs.basis).scores;
  return p;
}

inline Scenario small_scenario(int n = 50) {
  Scenario s;
  s.n = n;
  s.n_grid = 30;
  s.sigma_x = 2.0;
  s.sigma_u = 1.0;
  s.sigma_omega = 0.5;
  s.sigma_e = 0.5;
  return s;
}

}  // namespace sofri::testing
