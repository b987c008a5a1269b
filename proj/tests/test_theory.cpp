#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "smcmc/errors.hpp"
#include "smcmc/theory.hpp"
#include "support/stats_util.hpp"

using namespace smcmc::theory;
using smcmc::CertificateError;
using smcmc::ContractViolation;
using smcmc::RngStream;

namespace {

FiniteChain two_state(double a, double b) {
  FiniteChain chain;
  chain.T.resize(2, 2);
  chain.T << 1 - a, a, b, 1 - b;
  chain.pi.resize(2);
  chain.pi << b / (a + b), a / (a + b);
  return chain;
}

FiniteChain rows_equal_pi(const Eigen::VectorXd& pi) {
  FiniteChain chain;
  const auto n = pi.size();
  chain.T.resize(n, n);
  for (Eigen::Index x = 0; x < n; ++x) chain.T.row(x) = pi.transpose();
  chain.pi = pi;
  return chain;
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace

TEST_CASE("l1_distance basics") {
  CHECK(l1_distance(vec({0.3, 0.7}), vec({0.3, 0.7})) == 0.0);
  CHECK(l1_distance(vec({1.0, 0.0}), vec({0.0, 1.0})) == 2.0);
  CHECK(l1_distance(vec({0.5, 0.5}), vec({0.25, 0.75})) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(l1_distance(vec({1.0}), vec({0.5, 0.5})), ContractViolation);
}

TEST_CASE("uniform_rho on hand chains") {
  CHECK(uniform_rho(rows_equal_pi(vec({0.2, 0.5, 0.3}))) == doctest::Approx(0.0));
  CHECK(uniform_rho(two_state(0.5, 0.5)) == doctest::Approx(0.0));
  // Hand sum per row: |0.9-0.5| + |0.1-0.5| = 0.8; this is the one-step
  // contraction factor of the L1 distance (the chain decays exactly at
  // 0.8^t, so any smaller rate is impossible).
  CHECK(uniform_rho(two_state(0.1, 0.1)) == doctest::Approx(0.8));
}

TEST_CASE("check_universal: one-step chain, stationary start, random instances") {
  const FiniteChain one_step = rows_equal_pi(vec({0.1, 0.6, 0.3}));
  const auto rep1 = check_universal(one_step, vec({1.0, 0.0, 0.0}), 10);
  CHECK(rep1.passed());
  for (double margin : rep1.margins) CHECK(margin >= -1e-15);

  const FiniteChain chain = two_state(0.3, 0.45);
  const auto rep2 = check_universal(chain, chain.pi, 20);
  CHECK(rep2.passed());
  // p0 = pi keeps both sides at zero.
  CHECK(rep2.max_violation == doctest::Approx(0.0).epsilon(1e-14));

  RngStream rng(100);
  for (int i = 0; i < 100; ++i) {
    const FiniteChain random = random_chain(5, rng);
    const auto rep = check_universal(random, random_distribution(5, rng), 50);
    CHECK(rep.passed());
  }

  // Exact-decay chain: the bound is tight at every t.
  const auto tight = check_universal(two_state(0.1, 0.1), vec({1.0, 0.0}), 30);
  CHECK(tight.passed());
  for (double margin : tight.margins) CHECK(std::abs(margin) < 1e-12);
}

TEST_CASE("dobrushin dominance") {
  const auto trivial = check_dobrushin_dominance(rows_equal_pi(vec({0.4, 0.6})));
  CHECK(trivial.passed());
  CHECK(trivial.margins[0] == doctest::Approx(0.0));

  // Hand: sup_x ||T(x,.) - pi||_1 = 0.8 and beta = 1.6.
  const FiniteChain chain = two_state(0.1, 0.1);
  CHECK(uniform_rho(chain) == doctest::Approx(0.8));
  CHECK(dobrushin_beta(chain) == doctest::Approx(1.6));
  CHECK(check_dobrushin_dominance(chain).passed());

  RngStream rng(101);
  for (int i = 0; i < 100; ++i)
    CHECK(check_dobrushin_dominance(random_chain(4, rng)).passed());
}

TEST_CASE("lemma-2 rho is at most the minorization rate") {
  RngStream rng(102);
  for (int i = 0; i < 100; ++i) {
    const FiniteChain chain = random_chain(5, rng);
    // Best minorization measure: column minima.
    double overlap = 0.0;
    for (Eigen::Index y = 0; y < chain.T.cols(); ++y)
      overlap += chain.T.col(y).minCoeff();
    const double rho_minorization = 1.0 - overlap;
    CHECK(0.5 * uniform_rho(chain) <= rho_minorization + 1e-12);
  }
}

TEST_CASE("drift bound: V = 1 reduction and hand formula") {
  const FiniteChain chain = two_state(0.25, 0.15);
  DriftCertificate cert;
  cert.V = Eigen::VectorXd::Ones(2);
  cert.in_C = {true, true};
  cert.rho = uniform_rho(chain);
  cert.lambda = 0.4;
  cert.b = 1.0;  // drift holds: T V = 1 <= 0.4 + 1
  const auto rep = drift_bound_check(chain, cert, vec({1.0, 0.0}), 25);
  CHECK(rep.passed());

  // Formula instantiation at j = t.
  const double B = 1.0 + cert.b / cert.lambda;
  CHECK(drift_bound_value(cert, 1.0, 7, 7) ==
        doctest::Approx(std::pow(cert.rho, 7) + std::pow(cert.lambda, 7) * std::pow(B, 6)));
}

TEST_CASE("drift bound: searched certificates on random chains") {
  RngStream rng(103);
  int certified = 0;
  while (certified < 40) {
    const FiniteChain chain = random_chain(4, rng);
    const auto cert = search_drift_certificate(chain, rng);
    if (!cert) continue;
    ++certified;
    const auto rep = drift_bound_check(chain, *cert, random_distribution(4, rng), 30);
    CHECK(rep.passed());
  }
}

TEST_CASE("invalid certificates are rejected as such") {
  const FiniteChain chain = two_state(0.25, 0.15);
  DriftCertificate cert;
  cert.V = Eigen::VectorXd::Ones(2);
  cert.in_C = {true, true};
  cert.rho = uniform_rho(chain);
  cert.lambda = 0.4;
  cert.b = 0.0;  // drift fails on C: T V = 1 > 0.4
  CHECK_THROWS_AS(drift_bound_check(chain, cert, vec({1.0, 0.0}), 5), CertificateError);

  DriftCertificate bad_v = cert;
  bad_v.b = 1.0;
  bad_v.V = vec({0.5, 1.0});  // V must be >= 1
  CHECK_THROWS_AS(drift_bound_check(chain, bad_v, vec({1.0, 0.0}), 5), CertificateError);
}

TEST_CASE("smcmc bound: stationary sequence gives zero error and zero bound") {
  SmcmcInstance inst;
  const FiniteChain chain = two_state(0.3, 0.2);
  inst.p0 = chain.pi;
  for (int t = 0; t < 4; ++t) {
    inst.chains.push_back(chain);
    inst.m.push_back(2);
  }
  const auto rep = smcmc_bound_check(inst);
  CHECK(rep.passed());
  // alpha_t = 0 throughout: every sharp bound is exactly zero, so every
  // sharp-bound margin must be ~0 as well.
  for (std::size_t i = 0; i < rep.margins.size(); i += 3)
    CHECK(std::abs(rep.margins[i]) < 1e-12);
}

TEST_CASE("smcmc bound: tight single-step hand instance") {
  // Symmetric two-state kernel decays any mean-zero signal by exactly 0.8,
  // so both calibrations are tight at t = 1.
  SmcmcInstance inst;
  inst.chains.push_back(two_state(0.1, 0.1));
  inst.m = {1};
  inst.p0 = vec({0.9, 0.1});
  const auto rep = smcmc_bound_check(inst);
  CHECK(rep.passed());
  REQUIRE(rep.margins.size() == 3);
  CHECK(std::abs(rep.margins[0]) < 1e-14);  // sharp: 0.5*0.64 = 0.8*0.4
  CHECK(std::abs(rep.margins[1]) < 1e-14);  // weak: 0.64 = 2*0.8*0.4
}

TEST_CASE("smcmc bound: random drifting sequences") {
  RngStream rng(104);
  for (int i = 0; i < 40; ++i) {
    const auto inst = random_smcmc_instance(4, 5, 5, rng);
    CHECK(smcmc_bound_check(inst).passed());
  }
}

TEST_CASE("v-norm check: V=1 reduces to the universal check") {
  RngStream rng(105);
  const FiniteChain chain = random_chain(4, rng);
  const Eigen::VectorXd p0 = random_distribution(4, rng);
  const auto v_rep = v_norm_check(chain, Eigen::VectorXd::Ones(4), p0, 30);
  const auto u_rep = check_universal(chain, p0, 30);
  REQUIRE(v_rep.margins.size() == u_rep.margins.size());
  for (std::size_t i = 0; i < v_rep.margins.size(); ++i)
    CHECK(v_rep.margins[i] == doctest::Approx(u_rep.margins[i]).epsilon(1e-12));
}

TEST_CASE("v-norm check: random weights and stationary start") {
  RngStream rng(106);
  int accepted = 0;
  while (accepted < 40) {
    const FiniteChain chain = random_chain(5, rng);
    Eigen::VectorXd V(5);
    for (Eigen::Index i = 0; i < 5; ++i) V(i) = 1.0 + 2.5 * rng.uniform();
    try {
      const auto rep = v_norm_check(chain, V, random_distribution(5, rng), 40);
      CHECK(rep.passed());
      const auto zero = v_norm_check(chain, V, chain.pi, 10);
      CHECK(zero.max_violation == doctest::Approx(0.0).epsilon(1e-13));
      ++accepted;
    } catch (const CertificateError&) {
      continue;
    }
  }
}

TEST_CASE("spectral: 2-state closed form") {
  // lambda_1 = 1 - p - q = 0.5; f(t) = 0.5^t for the centered indicator.
  const FiniteChain chain = two_state(0.25, 0.25);
  const auto rep = spectral_acf_check(chain, vec({1.0, 0.0}), 20);
  CHECK(rep.lambda1 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(rep.flagged_orthogonal);
  CHECK(rep.routes.passed());
  CHECK(rep.decay_rate_hat == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(rep.rate_within(0.05));
}

TEST_CASE("spectral: constant h is rejected") {
  const FiniteChain chain = two_state(0.25, 0.25);
  CHECK_THROWS_AS(spectral_acf_check(chain, vec({2.0, 2.0}), 10), ContractViolation);
}

TEST_CASE("spectral: non-reversible input is rejected") {
  FiniteChain chain;
  chain.T.resize(3, 3);
  chain.T << 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0;  // 3-cycle
  chain.pi = vec({1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK_THROWS_AS(spectral_acf_check(chain, vec({1.0, 0.0, 0.0}), 10), ContractViolation);
}

TEST_CASE("spectral: h orthogonal to the top eigenfunction decays at lambda_2") {
  RngStream rng(107);
  const FiniteChain chain = random_reversible_chain(4, rng);
  // Independent eigen-oracle to build the second eigenfunction.
  Eigen::VectorXd sqrt_pi = chain.pi.cwiseSqrt();
  Eigen::MatrixXd S(4, 4);
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) S(x, y) = sqrt_pi(x) * chain.T(x, y) / sqrt_pi(y);
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  // Eigenvalues ascend; the trivial one is last. Take the two largest
  // moduli among the rest.
  std::vector<std::pair<double, int>> mods;
  for (int i = 0; i < 3; ++i) mods.push_back({std::abs(eig.eigenvalues()(i)), i});
  std::sort(mods.rbegin(), mods.rend());
  const int second = mods[1].second;
  Eigen::VectorXd h = eig.eigenvectors().col(second);
  for (int x = 0; x < 4; ++x) h(x) /= sqrt_pi(x);

  const int horizon = spectral_feasible_horizon(chain, h, 0.04, 60);
  REQUIRE(horizon > 0);
  const auto rep = spectral_acf_check(chain, h, horizon);
  CHECK(rep.flagged_orthogonal);
  CHECK(rep.target_rate == doctest::Approx(mods[1].first).epsilon(1e-9));
  CHECK(rep.rate_within(0.05));
  CHECK(rep.routes.passed());
}

TEST_CASE("hellinger between normals") {
  CHECK(hellinger_normal(1.3, 0.7, 1.3, 0.7) == doctest::Approx(0.0));
  const double h = hellinger_normal(0.0, 1.0, 0.0, 2.0);
  CHECK(h * h == doctest::Approx(1.0 - std::sqrt(4.0 / 5.0)).epsilon(1e-12));

  // Quadrature oracle: H^2 = (1/2) int (sqrt p - sqrt q)^2 in the
  // normalized convention the closed form uses.
  RngStream rng(108);
  for (int i = 0; i < 50; ++i) {
    const double m1 = rng.normal(), m2 = rng.normal();
    const double s1 = 0.3 + rng.uniform() * 2.0, s2 = 0.3 + rng.uniform() * 2.0;
    auto p = [&](double x) { return test_util::normal_pdf(x, m1, s1); };
    auto q = [&](double x) { return test_util::normal_pdf(x, m2, s2); };
    const double h2_quad = 0.5 * test_util::simpson(
                                     [&](double x) {
                                       const double d = std::sqrt(p(x)) - std::sqrt(q(x));
                                       return d * d;
                                     },
                                     -30.0, 30.0, 40000);
    const double hh = hellinger_normal(m1, s1, m2, s2);
    CHECK(hh * hh == doctest::Approx(h2_quad).epsilon(1e-6));
    const double l1_quad =
        test_util::simpson([&](double x) { return std::abs(p(x) - q(x)); }, -30.0, 30.0, 40000);
    // ||p - q||_1 <= 2 H_u where H_u = sqrt(2) H is the unnormalized
    // Hellinger distance; sharper Le Cam form plus the lower pairing.
    CHECK(l1_quad <= 2.0 * std::sqrt(2.0) * hh + 1e-8);
    CHECK(l1_quad <= 2.0 * hh * std::sqrt(2.0 - hh * hh) + 1e-8);
    CHECK(l1_quad >= 2.0 * hh * hh - 1e-8);
  }
}

TEST_CASE("posterior drift curve: single step and repeated observations") {
  GridPosteriorModel model;
  model.grid = Eigen::VectorXd::LinSpaced(41, -4.0, 4.0);
  model.log_prior = Eigen::VectorXd::Zero(41);
  model.log_lik = [](double theta, double y) {
    const double d = y - theta;
    return -0.5 * d * d;
  };
  model.observations = {0.7};
  const auto alpha = posterior_drift_curve(model, 1);
  REQUIRE(alpha.size() == 1);
  CHECK(alpha[0] > 0.0);
  CHECK(alpha[0] < 1.0);

  // Repeated identical observations stay well defined.
  GridPosteriorModel rep = model;
  rep.observations.assign(30, 1.0);
  const auto curve = posterior_drift_curve(rep, 30);
  for (double a : curve) {
    CHECK(std::isfinite(a));
    CHECK(a >= 0.0);
  }
}

TEST_CASE("posterior drift curve: conjugate normal rate near t^{-1/2}") {
  // Normal mean model with known unit variance; posteriors are enumerable
  // on a fine grid and alpha_t should shrink like t^{-1/2}.
  GridPosteriorModel model;
  model.grid = Eigen::VectorXd::LinSpaced(3001, -3.0, 3.0);
  const double tau2 = 4.0;
  model.log_prior = model.grid.unaryExpr([&](double th) { return -0.5 * th * th / tau2; });
  model.log_lik = [](double theta, double y) {
    const double d = y - theta;
    return -0.5 * d * d;
  };
  RngStream rng(109);
  const std::size_t n = 200;
  // Average over a few data replicates to steady the per-t noise.
  std::vector<double> mean_alpha(n, 0.0);
  const int reps = 5;
  for (int r = 0; r < reps; ++r) {
    model.observations.clear();
    for (std::size_t i = 0; i < n; ++i) model.observations.push_back(0.4 + rng.normal());
    const auto alpha = posterior_drift_curve(model, n);
    for (std::size_t t = 0; t < n; ++t) mean_alpha[t] += alpha[t] / reps;
  }
  // Log-log slope over t in [20, 200].
  std::vector<double> xs, ys;
  for (std::size_t t = 20; t <= 200; ++t) {
    xs.push_back(std::log(static_cast<double>(t)));
    ys.push_back(std::log(mean_alpha[t - 1]));
  }
  const double mx = test_util::mean_of(xs), my = test_util::mean_of(ys);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  CHECK(slope == doctest::Approx(-0.5).epsilon(0.4));  // within +-0.2 absolute

  // Enumerated alpha_t never exceeds the closed-form Hellinger bound
  // between the exact normal posteriors (up to grid error).
  model.observations.clear();
  RngStream rng2(110);
  for (std::size_t i = 0; i < 50; ++i) model.observations.push_back(0.4 + rng2.normal());
  const auto alpha = posterior_drift_curve(model, 50);
  double sum = 0.0, prev_mean = 0.0, prev_var = tau2;
  for (std::size_t t = 1; t <= 50; ++t) {
    sum += model.observations[t - 1];
    const double var = 1.0 / (1.0 / tau2 + static_cast<double>(t));
    const double mean = var * sum;
    if (t >= 2) {
      // Le Cam: TV <= H sqrt(2 - H^2) in the normalized convention.
      const double h =
          hellinger_normal(prev_mean, std::sqrt(prev_var), mean, std::sqrt(var));
      CHECK(alpha[t - 1] <= h * std::sqrt(2.0 - h * h) + 1e-3);
    }
    prev_mean = mean;
    prev_var = var;
  }
}

TEST_CASE("theorem-2 sharp bound never exceeds the weak bound") {
  RngStream rng(111);
  for (int i = 0; i < 25; ++i) {
    const auto inst = random_smcmc_instance(5, 4, 4, rng);
    const auto rep = smcmc_bound_check(inst);
    // Every third margin is the sharp-vs-weak comparison.
    for (std::size_t m = 2; m < rep.margins.size(); m += 3) CHECK(rep.margins[m] >= -1e-12);
  }
}
