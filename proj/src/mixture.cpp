#include "smcmc/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smcmc/errors.hpp"

namespace smcmc::mixture {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

void MixtureHyper::validate() const {
  if (!(kappa > 0.0) || !(alpha > 0.0) || !(beta > 0.0) || !(delta > 0.0))
    throw ConfigError("mixture hyperparameters kappa, alpha, beta, delta must be positive");
  if (k < 1) throw ConfigError("mixture needs at least one component");
}

std::vector<double> simulate_data(const MixtureTruth& truth, std::size_t n, std::uint64_t seed) {
  const std::size_t k = truth.mu.size();
  if (truth.lambda.size() != k || truth.w.size() != k || k == 0)
    throw ContractViolation("simulate_data: component size mismatch");
  double wsum = 0.0;
  for (double wj : truth.w) {
    if (wj < 0.0) throw ContractViolation("simulate_data: negative weight");
    wsum += wj;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw ContractViolation("simulate_data: weights must lie on the simplex");

  RngStream rng = RngStream::split(seed, 0);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = rng.categorical(truth.w);
    y[i] = rng.normal(truth.mu[j], 1.0 / std::sqrt(truth.lambda[j]));
  }
  return y;
}

double log_normal_pdf(double y, double mean, double precision) {
  const double d = y - mean;
  return 0.5 * (std::log(precision) - kLog2Pi) - 0.5 * precision * d * d;
}

double log_mix_density(double y, std::span<const double> mu, std::span<const double> lambda,
                       std::span<const double> w) {
  const std::size_t k = mu.size();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(k);
  for (std::size_t j = 0; j < k; ++j) {
    terms[j] = (w[j] > 0.0 ? std::log(w[j]) + log_normal_pdf(y, mu[j], lambda[j])
                           : -std::numeric_limits<double>::infinity());
    best = std::max(best, terms[j]);
  }
  if (!std::isfinite(best)) return best;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - best);
  return best + std::log(sum);
}

std::vector<double> responsibilities(double y, std::span<const double> mu,
                                     std::span<const double> lambda, std::span<const double> w) {
  const std::size_t k = mu.size();
  std::vector<double> logits(k);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j) {
    logits[j] = (w[j] > 0.0 ? std::log(w[j]) + log_normal_pdf(y, mu[j], lambda[j])
                            : -std::numeric_limits<double>::infinity());
    best = std::max(best, logits[j]);
  }
  std::vector<double> probs(k, 0.0);
  if (!std::isfinite(best)) throw ModelError("all responsibilities vanished");
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    probs[j] = std::exp(logits[j] - best);
    sum += probs[j];
  }
  for (double& p : probs) p /= sum;
  return probs;
}

double log_joint(const MixtureState& state, std::span<const double> y,
                 const MixtureHyper& hyper) {
  const std::size_t k = hyper.k;
  if (state.mu.size() != k || state.lambda.size() != k || state.w.size() != k)
    throw ContractViolation("log_joint: state size mismatch");
  if (state.z.size() != y.size()) throw ContractViolation("log_joint: labels vs data mismatch");

  double lp = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    lp += log_normal_pdf(state.mu[j], hyper.zeta, hyper.kappa);
    lp += hyper.alpha * std::log(hyper.beta) - std::lgamma(hyper.alpha) +
          (hyper.alpha - 1.0) * std::log(state.lambda[j]) - hyper.beta * state.lambda[j];
    lp += (hyper.delta - 1.0) * std::log(state.w[j]);
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::size_t j = state.z[i];
    if (j >= k) throw ContractViolation("log_joint: label out of range");
    lp += std::log(state.w[j]) + log_normal_pdf(y[i], state.mu[j], state.lambda[j]);
  }
  return lp;
}

double log_param_posterior(std::span<const double> mu, std::span<const double> lambda,
                           std::span<const double> w, std::span<const double> y,
                           const MixtureHyper& hyper) {
  double lp = 0.0;
  for (std::size_t j = 0; j < hyper.k; ++j) {
    lp += log_normal_pdf(mu[j], hyper.zeta, hyper.kappa);
    lp += (hyper.alpha - 1.0) * std::log(lambda[j]) - hyper.beta * lambda[j];
    lp += (hyper.delta - 1.0) * std::log(w[j]);
  }
  for (double yi : y) lp += log_mix_density(yi, mu, lambda, w);
  return lp;
}

void sample_labels(MixtureState& state, std::span<const double> y, RngStream& rng) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto probs = responsibilities(y[i], state.mu, state.lambda, state.w);
    state.z[i] = rng.categorical(probs);
  }
}

void sample_weights(MixtureState& state, const MixtureHyper& hyper, RngStream& rng) {
  std::vector<double> conc(hyper.k, hyper.delta);
  for (std::size_t label : state.z) conc[label] += 1.0;
  state.w = rng.dirichlet(conc);
}

void sample_precisions(MixtureState& state, std::span<const double> y, const MixtureHyper& hyper,
                       RngStream& rng) {
  for (std::size_t j = 0; j < hyper.k; ++j) {
    double count = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (state.z[i] != j) continue;
      const double d = y[i] - state.mu[j];
      count += 1.0;
      ss += d * d;
    }
    state.lambda[j] = rng.gamma(hyper.alpha + 0.5 * count, hyper.beta + 0.5 * ss);
  }
}

void sample_means(MixtureState& state, std::span<const double> y, const MixtureHyper& hyper,
                  RngStream& rng) {
  for (std::size_t j = 0; j < hyper.k; ++j) {
    double count = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (state.z[i] != j) continue;
      count += 1.0;
      sum += y[i];
    }
    const double precision = hyper.kappa + count * state.lambda[j];
    const double mean = (hyper.kappa * hyper.zeta + state.lambda[j] * sum) / precision;
    state.mu[j] = rng.normal(mean, 1.0 / std::sqrt(precision));
  }
}

void gibbs_sweep(MixtureState& state, std::span<const double> y, const MixtureHyper& hyper,
                 RngStream& rng) {
  if (y.empty()) throw ContractViolation("gibbs_sweep requires at least one observation");
  if (state.z.size() != y.size())
    throw ContractViolation("gibbs_sweep: labels vs data mismatch");
  sample_labels(state, y, rng);
  sample_weights(state, hyper, rng);
  sample_precisions(state, y, hyper, rng);
  sample_means(state, y, hyper, rng);
}

void jump_new_indicators(MixtureState& state, std::span<const double> y, std::size_t from,
                         RngStream& rng) {
  if (state.z.size() != from) throw ContractViolation("jump_new_indicators: state not at `from`");
  state.z.reserve(y.size());
  for (std::size_t i = from; i < y.size(); ++i) {
    const auto probs = responsibilities(y[i], state.mu, state.lambda, state.w);
    state.z.push_back(rng.categorical(probs));
  }
}

SortedMeans sorted_mean_summary(const Ensemble& ens, std::size_t k) {
  SortedMeans out;
  out.sorted.assign(k, 0.0);
  for (const auto& state : ens.states) {
    const auto& mu = state.values("mu");
    if (mu.size() != k) throw ContractViolation("sorted_mean_summary: wrong component count");
    for (std::size_t j = 0; j < k; ++j) out.sorted[j] += mu[j];
  }
  for (double& v : out.sorted) v /= static_cast<double>(ens.size());
  std::sort(out.sorted.begin(), out.sorted.end());
  if (k > 1) {
    double mean = 0.0;
    for (double v : out.sorted) mean += v;
    mean /= static_cast<double>(k);
    double ss = 0.0;
    for (double v : out.sorted) ss += (v - mean) * (v - mean);
    out.sd = std::sqrt(ss / static_cast<double>(k - 1));
  }
  return out;
}

ParameterVector pack_state(const MixtureState& state) {
  ParameterVector params;
  params.append_block("mu", state.mu);
  params.append_block("lambda", state.lambda);
  params.append_block("w", state.w);
  return params;
}

MixtureState unpack_state(const ParameterVector& params) {
  MixtureState state;
  state.mu = params.values("mu");
  state.lambda = params.values("lambda");
  state.w = params.values("w");
  for (double zi : params.gather_prefix("z@"))
    state.z.push_back(static_cast<std::size_t>(zi));
  return state;
}

void write_back(const MixtureState& state, ParameterVector& params) {
  params.mutable_values("mu") = state.mu;
  params.mutable_values("lambda") = state.lambda;
  params.mutable_values("w") = state.w;
  std::vector<double> z(state.z.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = static_cast<double>(state.z[i]);
  params.scatter_prefix("z@", z);
}

MixtureModel::MixtureModel(MixtureHyper hyper, InitSpec init)
    : hyper_(hyper), init_(std::move(init)) {
  hyper_.validate();
  if (!init_.mu_centers.empty() && init_.mu_centers.size() != hyper_.k)
    throw ConfigError("mixture init centers must have k entries");
}

ParameterVector MixtureModel::sample_prior(RngStream& rng) const {
  MixtureState state;
  state.mu.resize(hyper_.k);
  state.lambda.resize(hyper_.k);
  for (std::size_t j = 0; j < hyper_.k; ++j) {
    state.mu[j] = init_.mu_centers.empty()
                      ? rng.normal(hyper_.zeta, 1.0 / std::sqrt(hyper_.kappa))
                      : init_.mu_centers[j] + rng.normal(0.0, init_.mu_jitter_sd);
    state.lambda[j] = rng.gamma(hyper_.alpha, hyper_.beta);
  }
  std::vector<double> conc(hyper_.k, hyper_.delta);
  state.w = rng.dirichlet(conc);
  return pack_state(state);
}

KernelSuite MixtureModel::make_suite(std::span<const Observation> data,
                                     std::size_t prev_horizon) const {
  std::vector<double> y(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) y[i] = data[i].values[0];

  KernelSuite suite;
  suite.data_horizon = data.size();
  const MixtureHyper hyper = hyper_;
  const std::string block = "z@" + std::to_string(prev_horizon);

  suite.jump = [y, prev_horizon, block](ParameterVector& params, RngStream& rng) {
    MixtureState state = unpack_state(params);
    jump_new_indicators(state, y, prev_horizon, rng);
    std::vector<double> fresh(state.z.size() - prev_horizon);
    for (std::size_t i = 0; i < fresh.size(); ++i)
      fresh[i] = static_cast<double>(state.z[prev_horizon + i]);
    params.append_block(block, fresh);
  };
  suite.transit = [y, hyper](ParameterVector& params, RngStream& rng) {
    MixtureState state = unpack_state(params);
    gibbs_sweep(state, y, hyper, rng);
    write_back(state, params);
  };
  for (std::size_t j = 0; j < hyper_.k; ++j) suite.diag_components.emplace_back("mu", j);
  for (std::size_t j = 0; j < hyper_.k; ++j) suite.diag_components.emplace_back("lambda", j);
  for (std::size_t j = 0; j < hyper_.k; ++j) suite.diag_components.emplace_back("w", j);
  return suite;
}

std::vector<std::pair<std::string, double>> MixtureModel::summarize(const Ensemble& ens) const {
  const SortedMeans sm = sorted_mean_summary(ens, hyper_.k);
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t j = 0; j < sm.sorted.size(); ++j)
    out.emplace_back("mu_sorted_" + std::to_string(j + 1), sm.sorted[j]);
  out.emplace_back("sorted_sd", sm.sd);
  return out;
}

void MixtureModel::validate(const Observation& obs) const {
  if (obs.values.size() != 1)
    throw ModelError("mixture expects a single numeric column");
  if (!std::isfinite(obs.values[0])) throw ModelError("non-finite observation");
}

}  // namespace smcmc::mixture
