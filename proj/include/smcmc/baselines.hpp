#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "smcmc/ensemble.hpp"
#include "smcmc/mixture.hpp"
#include "smcmc/rng.hpp"

namespace smcmc::baselines {

// Weighted particle approximation of the current posterior.
struct ParticleSet {
  std::vector<ParameterVector> particles;
  std::vector<double> weights;  // simplex

  std::size_t size() const { return particles.size(); }
  void validate() const;
};

double effective_sample_size(std::span<const double> weights);

// Parallel full-data MCMC comparator: L chains, one jump to instantiate the
// latent blocks, then K full sweeps.
Ensemble parallel_mcmc(std::span<const Observation> data, const Model& model, std::size_t sweeps,
                       std::size_t n_chains, std::uint64_t seed, std::size_t workers);

struct SmcConfig {
  double ess_threshold = 0.5;   // resample when ESS < threshold * N
  std::size_t move_count = 5;   // MH sweeps after a resample
  double mu_step = 0.25;        // random-walk scales, tuned on a pilot run
  double log_lambda_step = 0.40;
  double logit_w_step = 0.35;

  void validate() const;
};

struct SmcStepInfo {
  double ess = 0.0;
  bool resampled = false;
  double accept_rate = 0.0;  // MH acceptance over the move sweeps, when run
};

// Reweight / resample / move sampler over the mixture parameters
// (mu, lambda, w), with labels integrated out of the weights.
class MixtureSmc {
 public:
  MixtureSmc(mixture::MixtureHyper hyper, SmcConfig config, std::size_t n_particles,
             std::uint64_t seed);

  // Advances from data horizon `prev` to `y.size()`.
  SmcStepInfo step(std::span<const double> y, std::size_t prev);

  const ParticleSet& particles() const { return set_; }
  mixture::SortedMeans summary() const;

 private:
  void mh_sweep(std::size_t p, std::span<const double> y, double& accepted, double& proposed);

  mixture::MixtureHyper hyper_;
  SmcConfig config_;
  ParticleSet set_;
  std::vector<RngStream> streams_;  // one per particle
  RngStream resample_stream_;
  std::size_t workers_ = 1;

 public:
  void set_workers(std::size_t workers) { workers_ = workers; }
};

// Multinomial resampling; exposed for unbiasedness tests.
std::vector<std::size_t> multinomial_resample(std::span<const double> weights, std::size_t n,
                                              RngStream& rng);

}  // namespace smcmc::baselines
