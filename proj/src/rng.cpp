#include "smcmc/rng.hpp"

#include <cmath>
#include <numbers>

#include "smcmc/errors.hpp"

namespace smcmc {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RngStream RngStream::split(std::uint64_t master, std::uint64_t index) {
  std::uint64_t state = master;
  std::uint64_t a = splitmix64(state);
  state = a ^ (index * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL);
  std::uint64_t b = splitmix64(state);
  return RngStream(b);
}

double RngStream::normal() {
  const double u1 = uniform_pos();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw ContractViolation("gamma requires shape > 0 and rate > 0");
  if (shape < 1.0) {
    // Boost the shape, then scale by u^{1/shape}.
    const double g = gamma(shape + 1.0, 1.0);
    const double u = uniform_pos();
    return g * std::pow(u, 1.0 / shape) / rate;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double RngStream::beta(double a, double b) {
  const double x = gamma(a, 1.0);
  const double y = gamma(b, 1.0);
  return x / (x + y);
}

std::vector<double> RngStream::dirichlet(std::span<const double> conc) {
  std::vector<double> out(conc.size());
  double sum = 0.0;
  do {
    sum = 0.0;
    for (std::size_t i = 0; i < conc.size(); ++i) {
      out[i] = gamma(conc[i], 1.0);
      sum += out[i];
    }
  } while (sum <= 0.0);
  for (double& v : out) v /= sum;
  return out;
}

double RngStream::std_normal_lower(double alpha) {
  if (alpha <= 0.0) {
    // Plain rejection; acceptance probability >= 1/2.
    for (;;) {
      const double x = normal();
      if (x >= alpha) return x;
    }
  }
  // Robert (1995) translated-exponential proposal.
  const double astar = 0.5 * (alpha + std::sqrt(alpha * alpha + 4.0));
  for (;;) {
    const double u = uniform_pos();
    const double x = alpha - std::log(u) / astar;
    const double w = uniform_pos();
    const double diff = x - astar;
    if (std::log(w) <= -0.5 * diff * diff) return x;
  }
}

double RngStream::truncated_normal_lower(double mean, double sd, double lower) {
  return mean + sd * std_normal_lower((lower - mean) / sd);
}

double RngStream::truncated_normal_upper(double mean, double sd, double upper) {
  return mean - sd * std_normal_lower((mean - upper) / sd);
}

std::size_t RngStream::categorical(std::span<const double> weights) {
  if (weights.empty()) throw ContractViolation("categorical on empty weights");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w))
      throw ContractViolation("categorical weights must be finite and nonnegative");
    total += w;
  }
  if (total <= 0.0) throw ContractViolation("categorical weights sum to zero");
  const double u = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

std::size_t RngStream::categorical_logits(std::span<const double> logits) {
  if (logits.empty()) throw ContractViolation("categorical_logits on empty logits");
  double m = logits[0];
  for (double l : logits) m = std::max(m, l);
  std::vector<double> w(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) w[i] = std::exp(logits[i] - m);
  return categorical(w);
}

}  // namespace smcmc
