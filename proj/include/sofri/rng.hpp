#pragma once

#include <cstdint>
#include <random>

namespace sofri {

/// Seeded Mersenne Twister keyed by (seed, stream). Streams are derived by
/// hashing, so `derive` gives independent generators for chains and
/// replicates without sharing state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Child generator for sub-stream `stream`, independent of this one's state.
  Rng derive(std::uint64_t stream) const;

  double uniform();  // (0, 1)
  double normal();
  /// Gamma(shape, scale = 1).
  double gamma(double shape);
  /// log of a Gamma(shape, 1) draw; stays finite for tiny shapes.
  double log_gamma_draw(double shape);
  double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }
  /// Inverse-gamma with density proportional to x^{-shape-1} exp(-scale/x).
  double inverse_gamma(double shape, double scale) { return scale / gamma(shape); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace sofri
