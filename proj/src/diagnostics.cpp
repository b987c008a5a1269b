#include "smcmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "smcmc/errors.hpp"

namespace smcmc {

namespace {

// Column is degenerate when all entries are identical.
bool degenerate(const double* col, std::size_t n, std::size_t stride) {
  for (std::size_t i = 1; i < n; ++i)
    if (col[i * stride] != col[0]) return false;
  return true;
}

}  // namespace

std::optional<double> cross_chain_acf(const AcfSnapshot& base, const AcfSnapshot& current) {
  if (base.chains != current.chains || base.components != current.components)
    throw ContractViolation("cross_chain_acf: snapshot shape mismatch");
  if (base.chains < 2 || base.components < 1)
    throw ContractViolation("cross_chain_acf: need >= 2 chains and >= 1 component");

  const std::size_t L = base.chains;
  const std::size_t p = base.components;
  std::optional<double> best;
  for (std::size_t j = 0; j < p; ++j) {
    const double* cb = base.values.data() + j;
    const double* cc = current.values.data() + j;
    if (degenerate(cb, L, p) || degenerate(cc, L, p)) continue;
    double mb = 0.0, mc = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      mb += cb[l * p];
      mc += cc[l * p];
    }
    mb /= static_cast<double>(L);
    mc /= static_cast<double>(L);
    double sbb = 0.0, scc = 0.0, sbc = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      const double db = cb[l * p] - mb;
      const double dc = cc[l * p] - mc;
      sbb += db * db;
      scc += dc * dc;
      sbc += db * dc;
    }
    if (sbb <= 0.0 || scc <= 0.0) continue;
    const double r = std::clamp(sbc / std::sqrt(sbb * scc), -1.0, 1.0);
    if (!best || r > *best) best = r;
  }
  return best;
}

std::optional<double> single_chain_acf(const std::vector<std::vector<double>>& trace,
                                       std::size_t lag, std::size_t s1, std::size_t s2) {
  if (trace.empty()) throw ContractViolation("single_chain_acf: no components");
  if (lag < 1) throw ContractViolation("single_chain_acf: lag must be >= 1");
  if (s2 <= s1 || s2 - s1 < lag + 1)
    throw ContractViolation("single_chain_acf: window too short for lag");
  if (s1 < lag) throw ContractViolation("single_chain_acf: window starts before lag history");
  for (const auto& comp : trace)
    if (comp.size() <= s2) throw ContractViolation("single_chain_acf: trace shorter than window");

  const double count = static_cast<double>(s2 - s1 + 1);
  std::optional<double> best;
  for (const auto& x : trace) {
    double mean = 0.0;
    for (std::size_t s = s1; s <= s2; ++s) mean += x[s];
    mean /= count;
    double denom = 0.0, numer = 0.0;
    bool flat = true;
    for (std::size_t s = s1; s <= s2; ++s) {
      if (x[s] != x[s1]) flat = false;
      const double d = x[s] - mean;
      denom += d * d;
      numer += d * (x[s - lag] - mean);
    }
    if (flat || denom <= 0.0) continue;
    const double r = numer / denom;
    if (!best || r > *best) best = r;
  }
  return best;
}

double epsilon_constraint_sum(double epsilon, std::size_t n) {
  // sum_{t=1..n} eps^{n+1-t}/sqrt(t); accumulate from the smallest exponents.
  double sum = 0.0;
  double power = epsilon;  // eps^{n+1-t} for t = n
  for (std::size_t t = n; t >= 1; --t) {
    sum += power / std::sqrt(static_cast<double>(t));
    power *= epsilon;
    if (power == 0.0) break;
    if (t == 1) break;
  }
  return sum;
}

EpsilonChoice select_epsilon(std::size_t n, double eps_T) {
  if (n < 1) throw ContractViolation("select_epsilon: n must be >= 1");
  if (!(eps_T > 0.0)) throw ContractViolation("select_epsilon: eps_T must be positive");

  constexpr long kGrid = 1000000;  // grid point k is k/1e6
  auto value = [n](long k) { return static_cast<double>(k) / static_cast<double>(kGrid); };
  auto feasible = [&](long k) { return epsilon_constraint_sum(value(k), n) <= eps_T; };

  if (!feasible(1)) return {value(1), true};
  long lo = 1, hi = kGrid - 1;  // lo always feasible
  if (feasible(hi)) return {value(hi), false};
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (feasible(mid))
      lo = mid;
    else
      hi = mid;
  }
  return {value(lo), false};
}

}  // namespace smcmc
