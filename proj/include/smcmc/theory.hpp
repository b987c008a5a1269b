#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smcmc/rng.hpp"

namespace smcmc::theory {

// Explicit finite-state chain: row-stochastic T with stationary pi.
struct FiniteChain {
  Eigen::MatrixXd T;
  Eigen::VectorXd pi;

  std::size_t states() const { return static_cast<std::size_t>(T.rows()); }
  void validate() const;  // rows sum to 1 (1e-12); pi T = pi (1e-10)
};

// Stationary distribution of a row-stochastic matrix (linear solve).
Eigen::VectorXd stationary_of(const Eigen::MatrixXd& T);

// sum_i |p_i - q_i|; equals twice the total-variation distance.
double l1_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

// Universal contraction factor: max_x ||T(x,.) - pi||_1. One application of
// T shrinks ||p - pi||_1 by at least this factor.
double uniform_rho(const FiniteChain& chain);

// Dobrushin coefficient: max_{x,y} ||T(x,.) - T(y,.)||_1.
double dobrushin_beta(const FiniteChain& chain);

// Outcome of one family of exact inequality assertions.
struct CheckReport {
  std::string name;
  std::size_t comparisons = 0;
  double max_violation = -1.0;           // max over asserts of lhs - rhs
  std::vector<double> margins;           // rhs - lhs per assert
  bool passed(double tol = 1e-12) const { return max_violation <= tol; }
  void record(double lhs, double rhs);
  double margin_percentile(double q) const;  // q in [0,1]
};

// ||T^t o p0 - pi||_1 <= rho^t ||p0 - pi||_1 for t = 1..t_max.
CheckReport check_universal(const FiniteChain& chain, const Eigen::VectorXd& p0, int t_max);

// max_x ||T(x,.) - pi||_1 / 2 <= max_{x,y} ||T(x,.) - T(y,.)||_1 / 2.
CheckReport check_dobrushin_dominance(const FiniteChain& chain);

// Certificate for the drift/local-closeness bound: subset C, local factor
// rho = max_{x in C} ||T(x,.) - pi||_1, and drift data (V, lambda, b) with
// (T V)(x) <= lambda V(x) + b 1_C(x).
struct DriftCertificate {
  Eigen::VectorXd V;        // >= 1 everywhere
  std::vector<bool> in_C;
  double rho = 0.0;
  double lambda = 0.0;
  double b = 0.0;
};

// Bound value rho^j + lambda^t B^{j-1} Vbar with B = 1 + b/lambda.
double drift_bound_value(const DriftCertificate& cert, double v_bar, int t, int j);

// Verifies the certificate's own conditions (CertificateError on failure),
// then asserts ||T^t o p0 - pi||_1 <= bound for all 1 <= j <= t <= t_max.
CheckReport drift_bound_check(const FiniteChain& chain, const DriftCertificate& cert,
                              const Eigen::VectorXd& p0, int t_max);

// Grid search for a valid drift certificate; empty when none is found.
std::optional<DriftCertificate> search_drift_certificate(const FiniteChain& chain,
                                                         RngStream& rng);

// Time-inhomogeneous instance: chains (T_t, pi_t), sweep counts m_t, initial p0.
struct SmcmcInstance {
  std::vector<FiniteChain> chains;
  std::vector<int> m;
  Eigen::VectorXd p0;
};

// Exact evolution vs the sequential-composition bounds: the sharp bound in
// total-variation calibration and the weaker product-form bound in L1.
CheckReport smcmc_bound_check(const SmcmcInstance& inst);

// V-norm of a signed measure: sum_x V(x) |mu(x)| (extremal sign function).
double v_norm(const Eigen::VectorXd& mu, const Eigen::VectorXd& V);

// From (chain, V) computes rho_V = max_x ||T(x,.) - pi||_V / V(x); requires
// rho_V < 1 (CertificateError otherwise), then asserts geometric decay
// ||T^t o p0 - pi||_V <= rho_V^t ||p0 - pi||_V.
CheckReport v_norm_check(const FiniteChain& chain, const Eigen::VectorXd& V,
                         const Eigen::VectorXd& p0, int t_max);

struct SpectralReport {
  double lambda1 = 0.0;         // largest-modulus nontrivial eigenvalue
  double overlap = 0.0;         // <h0, alpha1>_pi / ||h0||_pi
  bool flagged_orthogonal = false;
  double decay_rate_hat = 0.0;  // |f(t_max)|^{1/t_max}
  double target_rate = 0.0;     // |lambda1|, or the best-overlap |lambda| when flagged
  CheckReport routes;           // exact ACF vs eigen-expansion cross-check
  bool rate_within(double rel_tol) const;
};

// Exact stationary autocorrelation of h under a reversible chain vs the
// spectral rate. Throws ContractViolation on non-reversible input or h with
// (numerically) zero variance under pi.
SpectralReport spectral_acf_check(const FiniteChain& chain, const Eigen::VectorXd& h, int t_max);

// Smallest horizon t <= cap at which the eigen-expansion predicts
// |f(t)|^{1/t} within rel_tol of the target rate while |f(t)| stays above
// the floating-point noise floor; -1 when no such horizon exists.
int spectral_feasible_horizon(const FiniteChain& chain, const Eigen::VectorXd& h, double rel_tol,
                              int cap);

// Hellinger distance between N(mu1, s1^2) and N(mu2, s2^2); s1, s2 are sds.
double hellinger_normal(double mu1, double s1, double mu2, double s2);

// Tiny enumerable sequential-posterior model on a fixed parameter grid.
struct GridPosteriorModel {
  Eigen::VectorXd grid;                              // parameter values
  Eigen::VectorXd log_prior;                         // on the grid, unnormalized
  std::function<double(double theta, double y)> log_lik;
  std::vector<double> observations;
};

// alpha_t = 0.5 ||pi_t - pi_{t-1}||_1 for t = 1..n by direct enumeration.
std::vector<double> posterior_drift_curve(const GridPosteriorModel& model, std::size_t n);

// --- deterministic instance generators (shared by CLI verify and tests) ---

// Dirichlet(1) rows mixed toward a common stationary row.
FiniteChain random_chain(std::size_t n_states, RngStream& rng);

// Reversible chain from symmetric positive weights.
FiniteChain random_reversible_chain(std::size_t n_states, RngStream& rng);

// Slowly drifting targets with Metropolis-based kernels mixed toward pi_t.
SmcmcInstance random_smcmc_instance(std::size_t n_states, std::size_t t_max, int m_max,
                                    RngStream& rng);

Eigen::VectorXd random_distribution(std::size_t n_states, RngStream& rng);

}  // namespace smcmc::theory
