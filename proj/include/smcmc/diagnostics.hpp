#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace smcmc {

// One sweep's monitored components across the ensemble: chains x components.
struct AcfSnapshot {
  std::size_t chains = 0;
  std::size_t components = 0;
  std::vector<double> values;  // row-major, chains rows

  AcfSnapshot() = default;
  AcfSnapshot(std::size_t l, std::size_t p)
      : chains(l), components(p), values(l * p, 0.0) {}

  double& at(std::size_t chain, std::size_t comp) {
    return values[chain * components + comp];
  }
  double at(std::size_t chain, std::size_t comp) const {
    return values[chain * components + comp];
  }
};

// Cross-chain lag autocorrelation: max over components of the Pearson
// correlation across chains between `current` and `base` columns. Empty
// optional when every component has zero variance in one of the snapshots.
std::optional<double> cross_chain_acf(const AcfSnapshot& base, const AcfSnapshot& current);

// Single-chain lag-k autocorrelation over the sweep window [s1, s2],
// maximized over components. `trace[j][s]` is component j at sweep s.
std::optional<double> single_chain_acf(const std::vector<std::vector<double>>& trace,
                                       std::size_t lag, std::size_t s1, std::size_t s2);

struct EpsilonChoice {
  double epsilon = 0.0;
  bool saturated = false;  // even the smallest grid value violates the constraint
};

// Largest epsilon on the 1e-6 grid with sum_{t=1..n} eps^{n+1-t}/sqrt(t) <= eps_T.
EpsilonChoice select_epsilon(std::size_t n, double eps_T);

// The constraint sum itself; exported so tests can run an independent search.
double epsilon_constraint_sum(double epsilon, std::size_t n);

}  // namespace smcmc
