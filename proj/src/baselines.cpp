#include "smcmc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smcmc/errors.hpp"
#include "smcmc/parallel.hpp"

namespace smcmc::baselines {

void ParticleSet::validate() const {
  if (particles.size() != weights.size() || particles.size() < 2)
    throw ContractViolation("ParticleSet: need >= 2 weighted particles");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ContractViolation("ParticleSet: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ContractViolation("ParticleSet: weights must sum to 1");
}

double effective_sample_size(std::span<const double> weights) {
  double ss = 0.0;
  for (double w : weights) ss += w * w;
  if (ss <= 0.0) throw ContractViolation("effective_sample_size: zero weights");
  return 1.0 / ss;
}

Ensemble parallel_mcmc(std::span<const Observation> data, const Model& model, std::size_t sweeps,
                       std::size_t n_chains, std::uint64_t seed, std::size_t workers) {
  if (sweeps < 1) throw ConfigError("parallel_mcmc requires at least one sweep");
  if (data.empty()) throw ConfigError("parallel_mcmc: data is empty");
  Ensemble ens =
      init_ensemble([&](RngStream& rng) { return model.sample_prior(rng); }, n_chains, seed);
  const KernelSuite suite = model.make_suite(data, 0);
  parallel_for(ens.size(), workers, [&](std::size_t l) {
    suite.jump(ens.states[l], ens.streams[l]);
    for (std::size_t s = 0; s < sweeps; ++s) suite.transit(ens.states[l], ens.streams[l]);
  });
  ens.t = 1;
  ens.data_horizon = data.size();
  ens.history.push_back(sweeps);
  return ens;
}

void SmcConfig::validate() const {
  if (!(ess_threshold > 0.0) || !(ess_threshold <= 1.0))
    throw ConfigError("ess_threshold must lie in (0, 1]");
  if (move_count < 1) throw ConfigError("move_count must be >= 1");
  if (!(mu_step > 0.0) || !(log_lambda_step > 0.0) || !(logit_w_step > 0.0))
    throw ConfigError("MH step sizes must be positive");
}

std::vector<std::size_t> multinomial_resample(std::span<const double> weights, std::size_t n,
                                              RngStream& rng) {
  std::vector<std::size_t> picks(n);
  for (std::size_t i = 0; i < n; ++i) picks[i] = rng.categorical(weights);
  return picks;
}

namespace {

// Additive log-ratio coordinates of the simplex with the last weight as
// reference; log-Jacobian of the inverse map is sum_j log w_j.
std::vector<double> to_alr(std::span<const double> w) {
  std::vector<double> v(w.size() - 1);
  for (std::size_t j = 0; j + 1 < w.size(); ++j) v[j] = std::log(w[j] / w.back());
  return v;
}

std::vector<double> from_alr(std::span<const double> v) {
  std::vector<double> w(v.size() + 1);
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  double sum = std::exp(-m);
  w.back() = std::exp(-m);
  for (std::size_t j = 0; j < v.size(); ++j) {
    w[j] = std::exp(v[j] - m);
    sum += w[j];
  }
  for (double& x : w) x /= sum;
  return w;
}

double log_simplex_jacobian(std::span<const double> w) {
  double lj = 0.0;
  for (double x : w) lj += std::log(x);
  return lj;
}

}  // namespace

MixtureSmc::MixtureSmc(mixture::MixtureHyper hyper, SmcConfig config, std::size_t n_particles,
                       std::uint64_t seed)
    : hyper_(hyper), config_(config), resample_stream_(RngStream::split(seed, n_particles)) {
  hyper_.validate();
  config_.validate();
  if (n_particles < 2) throw ConfigError("SMC needs at least 2 particles");
  streams_.reserve(n_particles);
  std::vector<double> conc(hyper_.k, hyper_.delta);
  for (std::size_t p = 0; p < n_particles; ++p) {
    streams_.push_back(RngStream::split(seed, p));
    mixture::MixtureState state;
    state.mu.resize(hyper_.k);
    state.lambda.resize(hyper_.k);
    for (std::size_t j = 0; j < hyper_.k; ++j) {
      state.mu[j] = streams_[p].normal(hyper_.zeta, 1.0 / std::sqrt(hyper_.kappa));
      state.lambda[j] = streams_[p].gamma(hyper_.alpha, hyper_.beta);
    }
    state.w = streams_[p].dirichlet(conc);
    set_.particles.push_back(mixture::pack_state(state));
  }
  set_.weights.assign(n_particles, 1.0 / static_cast<double>(n_particles));
}

void MixtureSmc::mh_sweep(std::size_t p, std::span<const double> y, double& accepted,
                          double& proposed) {
  ParameterVector& part = set_.particles[p];
  RngStream& rng = streams_[p];
  std::vector<double> mu = part.values("mu");
  std::vector<double> lambda = part.values("lambda");
  std::vector<double> w = part.values("w");

  auto log_target = [&](std::span<const double> m, std::span<const double> l,
                        std::span<const double> ww) {
    return mixture::log_param_posterior(m, l, ww, y, hyper_);
  };

  // mu block.
  {
    std::vector<double> prop = mu;
    for (double& v : prop) v += rng.normal(0.0, config_.mu_step);
    const double lr = log_target(prop, lambda, w) - log_target(mu, lambda, w);
    proposed += 1.0;
    if (std::log(rng.uniform_pos()) < lr) {
      mu = prop;
      accepted += 1.0;
    }
  }
  // lambda block on the log scale.
  {
    std::vector<double> prop = lambda;
    double lj = 0.0;
    for (double& v : prop) {
      const double lv = std::log(v) + rng.normal(0.0, config_.log_lambda_step);
      lj += lv - std::log(v);  // log Jacobian ratio: prod lambda'/lambda
      v = std::exp(lv);
    }
    const double lr = log_target(mu, prop, w) - log_target(mu, lambda, w) + lj;
    proposed += 1.0;
    if (std::log(rng.uniform_pos()) < lr) {
      lambda = prop;
      accepted += 1.0;
    }
  }
  // w block on additive log-ratio coordinates.
  {
    std::vector<double> v = to_alr(w);
    for (double& x : v) x += rng.normal(0.0, config_.logit_w_step);
    const std::vector<double> prop = from_alr(v);
    const double lr = log_target(mu, lambda, prop) - log_target(mu, lambda, w) +
                      log_simplex_jacobian(prop) - log_simplex_jacobian(w);
    proposed += 1.0;
    if (std::log(rng.uniform_pos()) < lr) {
      w = prop;
      accepted += 1.0;
    }
  }

  part.mutable_values("mu") = mu;
  part.mutable_values("lambda") = lambda;
  part.mutable_values("w") = w;
}

SmcStepInfo MixtureSmc::step(std::span<const double> y, std::size_t prev) {
  if (prev >= y.size()) throw ContractViolation("MixtureSmc::step: no new observations");
  const std::size_t n = set_.size();

  // Reweight by the new batch's marginal likelihood under each particle.
  std::vector<double> log_w(n);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < n; ++p) {
    const ParameterVector& part = set_.particles[p];
    double inc = 0.0;
    for (std::size_t i = prev; i < y.size(); ++i)
      inc += mixture::log_mix_density(y[i], part.values("mu"), part.values("lambda"),
                                      part.values("w"));
    log_w[p] = (set_.weights[p] > 0.0 ? std::log(set_.weights[p]) : -1e300) + inc;
    best = std::max(best, log_w[p]);
  }
  if (!std::isfinite(best))
    throw ModelError("SMC weights degenerated to zero at horizon " + std::to_string(y.size()));
  double sum = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    log_w[p] = std::exp(log_w[p] - best);
    sum += log_w[p];
  }
  for (std::size_t p = 0; p < n; ++p) set_.weights[p] = log_w[p] / sum;

  SmcStepInfo info;
  info.ess = effective_sample_size(set_.weights);
  if (info.ess < config_.ess_threshold * static_cast<double>(n)) {
    info.resampled = true;
    const auto picks = multinomial_resample(set_.weights, n, resample_stream_);
    std::vector<ParameterVector> next;
    next.reserve(n);
    for (std::size_t p = 0; p < n; ++p) next.push_back(set_.particles[picks[p]]);
    set_.particles = std::move(next);
    std::fill(set_.weights.begin(), set_.weights.end(), 1.0 / static_cast<double>(n));

    std::vector<double> accepted(n, 0.0), proposed(n, 0.0);
    parallel_for(n, workers_, [&](std::size_t p) {
      for (std::size_t sweep = 0; sweep < config_.move_count; ++sweep)
        mh_sweep(p, y, accepted[p], proposed[p]);
    });
    double acc = 0.0, prop = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      acc += accepted[p];
      prop += proposed[p];
    }
    info.accept_rate = prop > 0.0 ? acc / prop : 0.0;
  }
  return info;
}

mixture::SortedMeans MixtureSmc::summary() const {
  mixture::SortedMeans out;
  const std::size_t k = hyper_.k;
  out.sorted.assign(k, 0.0);
  for (std::size_t p = 0; p < set_.size(); ++p) {
    const auto& mu = set_.particles[p].values("mu");
    for (std::size_t j = 0; j < k; ++j) out.sorted[j] += set_.weights[p] * mu[j];
  }
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

}  // namespace smcmc::baselines
