#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace smcmc {

// Deterministic per-chain random stream.
//
// Streams are derived from a master seed by a counter-based split
// (splitmix64 over the counter), so chain l always sees the same stream
// no matter how many worker threads execute the chains. All variate
// transforms are implemented here rather than with std:: distributions,
// whose algorithms are implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  // Counter-based split: stream `index` of `master`.
  static RngStream split(std::uint64_t master, std::uint64_t index);

  std::uint64_t raw() { return gen_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  // Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  // Standard normal (Box-Muller, no cached spare).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Gamma with shape-rate parametrization (Marsaglia-Tsang).
  double gamma(double shape, double rate);

  double beta(double a, double b);

  // Dirichlet with per-coordinate concentrations.
  std::vector<double> dirichlet(std::span<const double> conc);

  // Normal(mean, sd) conditioned on (lower, +inf).
  double truncated_normal_lower(double mean, double sd, double lower);
  // Normal(mean, sd) conditioned on (-inf, upper].
  double truncated_normal_upper(double mean, double sd, double upper);

  // Index draw proportional to nonnegative weights (need not be normalized).
  std::size_t categorical(std::span<const double> weights);
  // Index draw from unnormalized log-weights.
  std::size_t categorical_logits(std::span<const double> logits);

 private:
  double std_normal_lower(double alpha);  // standardized, conditioned on [alpha, inf)

  std::mt19937_64 gen_;
};

// splitmix64 step; used for seed derivation only.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace smcmc
