#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "smcmc/ensemble.hpp"
#include "smcmc/rng.hpp"

namespace smcmc::gp {

// H quantiles of the powered gamma prior (G ~ Gamma(shape, rate),
// a = G^{1/power}) at probabilities (h-1)/H, with the first taken at
// 1/(2H) to avoid the zero quantile.
std::vector<double> build_grid(std::size_t H, double shape, double rate, double power);

struct GpConfig {
  double sigma2 = 1.0;       // fixed kernel scale
  std::size_t grid_size = 10;  // H
  double prior_shape = 1.0;  // powered gamma prior for the inverse bandwidth
  double prior_rate = 1.0;
  double prior_power = 1.0;
  std::size_t jump_rounds = 1;  // r
  double jitter = 1e-8;
  std::size_t max_diag_sites = 8;
  bool fresh_factorization = false;  // rebuild factors each step (reference path)

  void validate() const;
};

// Per-bandwidth lower-triangular factors of the correlation matrix
// C_h(X_t, X_t) + jitter*I and of sigma2*(C_h + jitter*I) + I, both with
// their inverses, maintained by O(t^2) row appends.
class CholeskyCache {
 public:
  CholeskyCache(std::vector<double> grid, double sigma2, double jitter, bool fresh);

  void append(const Eigen::VectorXd& x_new);

  std::size_t horizon() const { return sites_.size(); }
  std::size_t grid_size() const { return grid_.size(); }
  const std::vector<double>& grid() const { return grid_; }
  double sigma2() const { return sigma2_; }
  double jitter() const { return jitter_; }
  bool conditioning_flagged() const { return flagged_; }

  const Eigen::MatrixXd& Lc(std::size_t h) const { return factors_[h].Lc; }
  const Eigen::MatrixXd& Lc_inv(std::size_t h) const { return factors_[h].Lc_inv; }
  const Eigen::MatrixXd& Lp(std::size_t h) const { return factors_[h].Lp; }
  const Eigen::MatrixXd& Lp_inv(std::size_t h) const { return factors_[h].Lp_inv; }
  double logdet_C(std::size_t h) const { return factors_[h].logdet_C; }
  const std::vector<Eigen::VectorXd>& sites() const { return sites_; }

  double corr(std::size_t h, const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  // C_h(X_t, x) against the first t stored sites.
  Eigen::VectorXd corr_vector(std::size_t h, const Eigen::VectorXd& x, std::size_t t) const;

 private:
  struct Factors {
    Eigen::MatrixXd Lc, Lc_inv, Lp, Lp_inv;
    double logdet_C = 0.0;
  };
  void append_one(Factors& f, std::size_t h, const Eigen::VectorXd& x_new);
  void rebuild(Factors& f, std::size_t h);

  std::vector<double> grid_;
  double sigma2_;
  double jitter_;
  bool fresh_;
  bool flagged_ = false;
  std::vector<Eigen::VectorXd> sites_;
  std::vector<Factors> factors_;
};

// Plain-struct view of one chain's GP state.
struct GpState {
  Eigen::VectorXd f;  // latent function values at observed sites
  Eigen::VectorXd z;  // probit latents
  std::size_t h = 0;  // inverse-bandwidth grid index
};

GpState unpack_gp_state(const ParameterVector& params);
void write_back_gp(const GpState& state, ParameterVector& params);

// One Gibbs sweep: z_i | f, y; F | z, h (joint draw); h | F.
void gibbs_sweep_gp(GpState& state, std::span<const double> y, const CholeskyCache& cache,
                    RngStream& rng);

// Appends (f(x_new), z_new) by r alternating conditional draws; the cache
// must already be appended through the new site.
void jump_new_site(GpState& state, double y_new, std::size_t site_index,
                   const CholeskyCache& cache, std::size_t rounds, RngStream& rng);

// Monte Carlo average over chains of Phi(f(x_star)) with the Gaussian
// conditional integrated in closed form.
double predict(const Ensemble& ens, const Eigen::VectorXd& x_star, const CholeskyCache& cache);

// Batched predictions; whitens each chain's latents once.
std::vector<double> predict_many(const Ensemble& ens, std::span<const Eigen::VectorXd> points,
                                 const CholeskyCache& cache);

class GpModel : public Model {
 public:
  explicit GpModel(GpConfig config);

  ParameterVector sample_prior(RngStream& rng) const override;
  KernelSuite make_suite(std::span<const Observation> data,
                         std::size_t prev_horizon) const override;
  std::vector<std::pair<std::string, double>> summarize(const Ensemble& ens) const override;
  void validate(const Observation& obs) const override;

  const CholeskyCache& cache() const { return *cache_; }
  const GpConfig& config() const { return config_; }

 private:
  GpConfig config_;
  std::vector<double> grid_;
  mutable std::unique_ptr<CholeskyCache> cache_;
};

double normal_cdf(double x);

}  // namespace smcmc::gp
