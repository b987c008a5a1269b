#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "smcmc/ensemble.hpp"
#include "smcmc/rng.hpp"

namespace smcmc::mixture {

// Exchangeable prior: mu_j ~ N(zeta, 1/kappa), lambda_j ~ Ga(alpha, beta)
// (shape-rate), w ~ Dirichlet(delta).
struct MixtureHyper {
  double zeta = 0.0;
  double kappa = 0.01;
  double alpha = 1.0;
  double beta = 2.0;
  double delta = 1.0;
  std::size_t k = 4;

  void validate() const;
};

struct MixtureState {
  std::vector<double> mu;      // k component means
  std::vector<double> lambda;  // k inverse variances
  std::vector<double> w;       // k-simplex weights
  std::vector<std::size_t> z;  // labels in [0, k), one per observation
};

struct MixtureTruth {
  std::vector<double> mu;
  std::vector<double> lambda;
  std::vector<double> w;
};

// n iid draws from the k-component normal mixture.
std::vector<double> simulate_data(const MixtureTruth& truth, std::size_t n, std::uint64_t seed);

double log_normal_pdf(double y, double mean, double precision);

// log of sum_j w_j N(y; mu_j, 1/lambda_j).
double log_mix_density(double y, std::span<const double> mu, std::span<const double> lambda,
                       std::span<const double> w);

// P(z = j | params, y), normalized.
std::vector<double> responsibilities(double y, std::span<const double> mu,
                                     std::span<const double> lambda, std::span<const double> w);

// Unnormalized log joint posterior density of (mu, lambda, w, z) given y.
double log_joint(const MixtureState& state, std::span<const double> y, const MixtureHyper& hyper);

// Unnormalized log posterior of (mu, lambda, w) with labels integrated out.
double log_param_posterior(std::span<const double> mu, std::span<const double> lambda,
                           std::span<const double> w, std::span<const double> y,
                           const MixtureHyper& hyper);

// Full-conditional updates; gibbs_sweep applies them in the order
// z -> w -> lambda -> mu.
void sample_labels(MixtureState& state, std::span<const double> y, RngStream& rng);
void sample_weights(MixtureState& state, const MixtureHyper& hyper, RngStream& rng);
void sample_precisions(MixtureState& state, std::span<const double> y, const MixtureHyper& hyper,
                       RngStream& rng);
void sample_means(MixtureState& state, std::span<const double> y, const MixtureHyper& hyper,
                  RngStream& rng);
void gibbs_sweep(MixtureState& state, std::span<const double> y, const MixtureHyper& hyper,
                 RngStream& rng);

// Draws labels for y[from, y.size()) from their exact full conditional and
// appends them; everything else is untouched.
void jump_new_indicators(MixtureState& state, std::span<const double> y, std::size_t from,
                         RngStream& rng);

struct SortedMeans {
  std::vector<double> sorted;  // ensemble means of mu_j, increasing
  double sd = 0.0;             // sample sd of the sorted values
};

SortedMeans sorted_mean_summary(const Ensemble& ens, std::size_t k);

// Chain initialization: mu at the given centers plus N(0, jitter_sd^2)
// noise (prior draws when centers are empty); lambda, w from the prior.
struct InitSpec {
  std::vector<double> mu_centers;
  double mu_jitter_sd = 0.1;
};

// ParameterVector layout: blocks "mu", "lambda", "w", then one "z@<start>"
// block per data step.
ParameterVector pack_state(const MixtureState& state_without_z);
MixtureState unpack_state(const ParameterVector& params);
void write_back(const MixtureState& state, ParameterVector& params);

class MixtureModel : public Model {
 public:
  MixtureModel(MixtureHyper hyper, InitSpec init);

  ParameterVector sample_prior(RngStream& rng) const override;
  KernelSuite make_suite(std::span<const Observation> data,
                         std::size_t prev_horizon) const override;
  std::vector<std::pair<std::string, double>> summarize(const Ensemble& ens) const override;
  void validate(const Observation& obs) const override;

  const MixtureHyper& hyper() const { return hyper_; }

 private:
  MixtureHyper hyper_;
  InitSpec init_;
};

}  // namespace smcmc::mixture
