#include "smcmc/theory.hpp"

#include <algorithm>
#include <cmath>

#include "smcmc/errors.hpp"

namespace smcmc::theory {

namespace {
constexpr double kRowTol = 1e-12;
constexpr double kStatTol = 1e-10;
}  // namespace

void FiniteChain::validate() const {
  const auto n = T.rows();
  if (T.cols() != n || pi.size() != n || n < 2)
    throw ContractViolation("FiniteChain: shape mismatch");
  if (T.minCoeff() < 0.0 || pi.minCoeff() < 0.0)
    throw ContractViolation("FiniteChain: negative entries");
  for (Eigen::Index x = 0; x < n; ++x)
    if (std::abs(T.row(x).sum() - 1.0) > kRowTol)
      throw ContractViolation("FiniteChain: row " + std::to_string(x) + " does not sum to 1");
  if (std::abs(pi.sum() - 1.0) > kRowTol)
    throw ContractViolation("FiniteChain: pi is not a distribution");
  const Eigen::VectorXd piT = T.transpose() * pi;
  if ((piT - pi).cwiseAbs().maxCoeff() > kStatTol)
    throw ContractViolation("FiniteChain: pi is not stationary for T");
}

Eigen::VectorXd stationary_of(const Eigen::MatrixXd& T) {
  const auto n = T.rows();
  Eigen::MatrixXd A = T.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(0).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(0) = 1.0;
  return A.partialPivLu().solve(b);
}

double l1_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw ContractViolation("l1_distance: size mismatch");
  return (p - q).cwiseAbs().sum();
}

double uniform_rho(const FiniteChain& chain) {
  double worst = 0.0;
  for (Eigen::Index x = 0; x < chain.T.rows(); ++x)
    worst = std::max(worst, (chain.T.row(x).transpose() - chain.pi).cwiseAbs().sum());
  return worst;
}

double dobrushin_beta(const FiniteChain& chain) {
  double worst = 0.0;
  const auto n = chain.T.rows();
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = x + 1; y < n; ++y)
      worst = std::max(worst, (chain.T.row(x) - chain.T.row(y)).cwiseAbs().sum());
  return worst;
}

void CheckReport::record(double lhs, double rhs) {
  ++comparisons;
  max_violation = std::max(max_violation, lhs - rhs);
  margins.push_back(rhs - lhs);
}

double CheckReport::margin_percentile(double q) const {
  if (margins.empty()) return 0.0;
  std::vector<double> sorted = margins;
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(i);
  return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
}

CheckReport check_universal(const FiniteChain& chain, const Eigen::VectorXd& p0, int t_max) {
  chain.validate();
  const double rho = uniform_rho(chain);
  if (rho >= 1.0) throw CertificateError("check_universal requires uniform_rho < 1");
  CheckReport rep;
  rep.name = "universal";
  const double base = l1_distance(p0, chain.pi);
  Eigen::VectorXd p = p0;
  double rate = 1.0;
  for (int t = 1; t <= t_max; ++t) {
    p = chain.T.transpose() * p;
    rate *= rho;
    rep.record(l1_distance(p, chain.pi), rate * base);
  }
  return rep;
}

CheckReport check_dobrushin_dominance(const FiniteChain& chain) {
  chain.validate();
  CheckReport rep;
  rep.name = "dobrushin";
  rep.record(0.5 * uniform_rho(chain), 0.5 * dobrushin_beta(chain));
  return rep;
}

double drift_bound_value(const DriftCertificate& cert, double v_bar, int t, int j) {
  const double B = 1.0 + cert.b / cert.lambda;
  return std::pow(cert.rho, j) +
         std::pow(cert.lambda, t) * std::pow(B, j - 1) * v_bar;
}

namespace {

void verify_certificate(const FiniteChain& chain, const DriftCertificate& cert) {
  const auto n = chain.T.rows();
  if (cert.V.size() != n || cert.in_C.size() != static_cast<std::size_t>(n))
    throw CertificateError("certificate shape mismatch");
  if (cert.V.minCoeff() < 1.0) throw CertificateError("V must be >= 1 everywhere");
  if (!(cert.lambda > 0.0) || !(cert.lambda < 1.0))
    throw CertificateError("lambda must lie in (0,1)");
  if (cert.b < 0.0) throw CertificateError("b must be nonnegative");
  if (!(cert.rho < 1.0)) throw CertificateError("rho must be < 1");
  bool any_c = false;
  for (Eigen::Index x = 0; x < n; ++x) {
    const double row_dist = (chain.T.row(x).transpose() - chain.pi).cwiseAbs().sum();
    const double drift = chain.T.row(x) * cert.V;
    if (cert.in_C[static_cast<std::size_t>(x)]) {
      any_c = true;
      if (row_dist > cert.rho + kRowTol)
        throw CertificateError("local closeness condition fails on C");
      if (drift > cert.lambda * cert.V(x) + cert.b + kRowTol)
        throw CertificateError("drift condition fails on C");
    } else if (drift > cert.lambda * cert.V(x) + kRowTol) {
      throw CertificateError("drift condition fails off C");
    }
  }
  if (!any_c) throw CertificateError("C must be nonempty");
}

}  // namespace

CheckReport drift_bound_check(const FiniteChain& chain, const DriftCertificate& cert,
                              const Eigen::VectorXd& p0, int t_max) {
  chain.validate();
  verify_certificate(chain, cert);
  const double v_bar = cert.V.dot(p0);
  CheckReport rep;
  rep.name = "drift_bound";
  Eigen::VectorXd p = p0;
  for (int t = 1; t <= t_max; ++t) {
    p = chain.T.transpose() * p;
    const double exact = l1_distance(p, chain.pi);
    for (int j = 1; j <= t; ++j)
      rep.record(exact, drift_bound_value(cert, v_bar, t, j));
  }
  return rep;
}

std::optional<DriftCertificate> search_drift_certificate(const FiniteChain& chain,
                                                         RngStream& rng) {
  const auto n = chain.T.rows();
  DriftCertificate best;
  bool found = false;
  double best_score = 2.0;  // smaller rho+lambda is better
  for (int attempt = 0; attempt < 64; ++attempt) {
    DriftCertificate cand;
    cand.in_C.assign(static_cast<std::size_t>(n), false);
    std::size_t in_count = 0;
    for (std::size_t x = 0; x < static_cast<std::size_t>(n); ++x)
      if (rng.uniform() < 0.75) {
        cand.in_C[x] = true;
        ++in_count;
      }
    if (in_count == 0) cand.in_C[static_cast<std::size_t>(rng.raw() % n)] = true;

    static constexpr double kGammas[] = {0.5, 1.0, 2.0, 4.0};
    const double gamma = kGammas[rng.raw() % 4];
    cand.V = Eigen::VectorXd::Ones(n);
    for (Eigen::Index x = 0; x < n; ++x)
      if (!cand.in_C[static_cast<std::size_t>(x)]) cand.V(x) = 1.0 + gamma;

    double rho = 0.0, lam = 0.0, b = 0.0;
    bool ok = true;
    for (Eigen::Index x = 0; x < n; ++x) {
      const double drift = chain.T.row(x) * cand.V;
      if (cand.in_C[static_cast<std::size_t>(x)]) {
        rho = std::max(rho, (chain.T.row(x).transpose() - chain.pi).cwiseAbs().sum());
      } else {
        lam = std::max(lam, drift / cand.V(x));
      }
    }
    if (lam == 0.0) lam = 0.5;  // C is the whole space; any lambda in (0,1) works
    if (rho >= 1.0 || lam >= 1.0) ok = false;
    if (ok) {
      for (Eigen::Index x = 0; x < n; ++x)
        if (cand.in_C[static_cast<std::size_t>(x)]) {
          const double drift = chain.T.row(x) * cand.V;
          b = std::max(b, drift - lam * cand.V(x));
        }
      cand.rho = rho;
      cand.lambda = lam;
      cand.b = std::max(b, 0.0);
      const double score = rho + lam;
      if (score < best_score) {
        best = cand;
        best_score = score;
        found = true;
      }
    }
  }
  if (!found) return std::nullopt;
  return best;
}

CheckReport smcmc_bound_check(const SmcmcInstance& inst) {
  if (inst.chains.empty() || inst.chains.size() != inst.m.size())
    throw ContractViolation("smcmc_bound_check: malformed instance");
  for (const auto& c : inst.chains) c.validate();

  CheckReport rep;
  rep.name = "smcmc_bound";
  const std::size_t t_max = inst.chains.size();
  std::vector<double> eps(t_max), alpha(t_max);
  Eigen::VectorXd prev_pi = inst.p0;
  for (std::size_t t = 0; t < t_max; ++t) {
    const double rho = uniform_rho(inst.chains[t]);
    if (rho >= 1.0) throw CertificateError("smcmc_bound_check requires rho_t < 1 for all t");
    if (inst.m[t] < 1) throw ContractViolation("m_t must be >= 1");
    eps[t] = std::pow(rho, inst.m[t]);
    alpha[t] = 0.5 * l1_distance(inst.chains[t].pi, prev_pi);
    prev_pi = inst.chains[t].pi;
  }

  Eigen::VectorXd p = inst.p0;
  for (std::size_t t = 0; t < t_max; ++t) {
    for (int s = 0; s < inst.m[t]; ++s) p = inst.chains[t].T.transpose() * p;
    const double exact = l1_distance(p, inst.chains[t].pi);

    // Sharp sequential bound, total-variation calibration.
    double sharp = 0.0;
    for (std::size_t s = 0; s <= t; ++s) {
      double prod = 1.0;
      for (std::size_t u = s + 1; u <= t; ++u) prod *= eps[u] * (1.0 - alpha[u]);
      sharp += prod * eps[s] * alpha[s];
    }
    rep.record(0.5 * exact, sharp);

    // Weaker product-form bound, L1 calibration.
    double weak = 0.0;
    for (std::size_t s = 0; s <= t; ++s) {
      double prod = 1.0;
      for (std::size_t u = s; u <= t; ++u) prod *= eps[u];
      weak += prod * 2.0 * alpha[s];
    }
    rep.record(exact, weak);

    // The sharp bound never exceeds the weaker one (as TV quantities).
    rep.record(sharp, 0.5 * weak);
  }
  return rep;
}

double v_norm(const Eigen::VectorXd& mu, const Eigen::VectorXd& V) {
  if (mu.size() != V.size()) throw ContractViolation("v_norm: size mismatch");
  return mu.cwiseAbs().dot(V);
}

CheckReport v_norm_check(const FiniteChain& chain, const Eigen::VectorXd& V,
                         const Eigen::VectorXd& p0, int t_max) {
  chain.validate();
  const auto n = chain.T.rows();
  if (V.size() != n || V.minCoeff() < 1.0)
    throw CertificateError("v_norm_check: V must be >= 1 on the state space");
  double rho_v = 0.0;
  for (Eigen::Index x = 0; x < n; ++x) {
    const Eigen::VectorXd row_diff = chain.T.row(x).transpose() - chain.pi;
    rho_v = std::max(rho_v, v_norm(row_diff, V) / V(x));
  }
  if (rho_v >= 1.0)
    throw CertificateError("v_norm_check: supplied V gives rho_V >= 1");

  CheckReport rep;
  rep.name = "v_norm";
  const double base = v_norm(p0 - chain.pi, V);
  Eigen::VectorXd p = p0;
  double rate = 1.0;
  for (int t = 1; t <= t_max; ++t) {
    p = chain.T.transpose() * p;
    rate *= rho_v;
    rep.record(v_norm(p - chain.pi, V), rate * base);
  }
  return rep;
}

bool SpectralReport::rate_within(double rel_tol) const {
  return std::abs(decay_rate_hat - target_rate) <= rel_tol * target_rate;
}

namespace {

struct SpectralData {
  Eigen::VectorXd evals;
  std::vector<double> coef;  // <h0, alpha_i>_pi, zero at the trivial index
  Eigen::Index trivial = 0;
  Eigen::Index top = 0;
  double var = 0.0;
  Eigen::VectorXd h0;

  double f_eigen(int t) const {
    double f = 0.0;
    for (Eigen::Index i = 0; i < evals.size(); ++i) {
      if (i == trivial) continue;
      const double c = coef[static_cast<std::size_t>(i)];
      f += c * c * std::pow(evals(i), t) / var;
    }
    return f;
  }
};

SpectralData spectral_data(const FiniteChain& chain, const Eigen::VectorXd& h) {
  chain.validate();
  const auto n = chain.T.rows();
  if (h.size() != n) throw ContractViolation("spectral_acf_check: h size mismatch");
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y)
      if (std::abs(chain.pi(x) * chain.T(x, y) - chain.pi(y) * chain.T(y, x)) > 1e-10)
        throw ContractViolation("spectral_acf_check: chain is not reversible");
  if (chain.pi.minCoeff() <= 0.0)
    throw ContractViolation("spectral_acf_check: pi must be strictly positive");

  // Symmetrize: S = D^{1/2} T D^{-1/2} shares T's spectrum, self-adjoint.
  const Eigen::VectorXd sqrt_pi = chain.pi.cwiseSqrt();
  Eigen::MatrixXd S(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y)
      S(x, y) = sqrt_pi(x) * chain.T(x, y) / sqrt_pi(y);
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  if (eig.info() != Eigen::Success)
    throw ContractViolation("spectral_acf_check: eigensolver failed");

  SpectralData data;
  data.evals = eig.eigenvalues();
  // Eigenfunctions alpha_i = D^{-1/2} v_i, orthonormal in L^2(pi).
  Eigen::MatrixXd funcs = eig.eigenvectors();
  for (Eigen::Index x = 0; x < n; ++x) funcs.row(x) /= sqrt_pi(x);

  data.trivial = 0;
  for (Eigen::Index i = 1; i < n; ++i)
    if (std::abs(data.evals(i) - 1.0) < std::abs(data.evals(data.trivial) - 1.0))
      data.trivial = i;
  Eigen::Index top = -1;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == data.trivial) continue;
    if (top < 0 || std::abs(data.evals(i)) > std::abs(data.evals(top))) top = i;
  }
  data.top = top;

  data.h0 = h;
  data.h0.array() -= chain.pi.dot(h);
  data.var = (data.h0.array().square() * chain.pi.array()).sum();
  if (data.var <= 1e-14)
    throw ContractViolation("spectral_acf_check: h is constant under pi");

  data.coef.assign(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == data.trivial) continue;
    data.coef[static_cast<std::size_t>(i)] =
        (data.h0.array() * funcs.col(i).array() * chain.pi.array()).sum();
  }
  return data;
}

}  // namespace

SpectralReport spectral_acf_check(const FiniteChain& chain, const Eigen::VectorXd& h, int t_max) {
  if (t_max < 1) throw ContractViolation("spectral_acf_check: t_max must be >= 1");
  const SpectralData data = spectral_data(chain, h);

  SpectralReport rep;
  rep.lambda1 = std::abs(data.evals(data.top));
  rep.overlap = data.coef[static_cast<std::size_t>(data.top)] / std::sqrt(data.var);
  rep.flagged_orthogonal = std::abs(rep.overlap) < 1e-6;

  // When h misses the top eigenfunction the decay is governed by the
  // largest-|lambda| eigenvalue it does load on.
  double target = rep.lambda1;
  if (rep.flagged_orthogonal) {
    target = 0.0;
    for (Eigen::Index i = 0; i < data.evals.size(); ++i) {
      if (i == data.trivial) continue;
      if (std::abs(data.coef[static_cast<std::size_t>(i)]) > 1e-8)
        target = std::max(target, std::abs(data.evals(i)));
    }
  }
  rep.target_rate = target;

  // Route A: exact ACF by matrix-vector iteration.
  // Route B: eigen-expansion f(t) = sum_i c_i^2 lambda_i^t / var.
  rep.routes.name = "spectral_routes";
  Eigen::VectorXd g = data.h0;
  double f_tmax = 0.0;
  auto pi_inner = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a.array() * b.array() * chain.pi.array()).sum();
  };
  for (int t = 1; t <= t_max; ++t) {
    g = chain.T * g;
    const double f_exact = pi_inner(data.h0, g) / data.var;
    rep.routes.record(std::abs(f_exact - data.f_eigen(t)), 1e-10);
    if (t == t_max) f_tmax = f_exact;
  }
  rep.decay_rate_hat = std::pow(std::abs(f_tmax), 1.0 / static_cast<double>(t_max));
  return rep;
}

int spectral_feasible_horizon(const FiniteChain& chain, const Eigen::VectorXd& h, double rel_tol,
                              int cap) {
  const SpectralData data = spectral_data(chain, h);
  // Largest-modulus eigenvalue that h actually loads on; matches the
  // check's flagged-orthogonal behavior.
  double target = 0.0;
  for (Eigen::Index i = 0; i < data.evals.size(); ++i) {
    if (i == data.trivial) continue;
    if (std::abs(data.coef[static_cast<std::size_t>(i)]) > 1e-8)
      target = std::max(target, std::abs(data.evals(i)));
  }
  if (target <= 0.0) return -1;
  for (int t = 1; t <= cap; ++t) {
    const double f = data.f_eigen(t);
    if (std::abs(f) < 1e-9) return -1;  // decayed past the fp noise floor
    const double rate = std::pow(std::abs(f), 1.0 / static_cast<double>(t));
    if (std::abs(rate - target) <= rel_tol * target) return t;
  }
  return -1;
}

double hellinger_normal(double mu1, double s1, double mu2, double s2) {
  if (!(s1 > 0.0) || !(s2 > 0.0))
    throw ContractViolation("hellinger_normal: sds must be positive");
  const double ss = s1 * s1 + s2 * s2;
  const double h2 =
      1.0 - std::sqrt(2.0 * s1 * s2 / ss) * std::exp(-0.25 * (mu1 - mu2) * (mu1 - mu2) / ss);
  return std::sqrt(std::max(0.0, h2));
}

std::vector<double> posterior_drift_curve(const GridPosteriorModel& model, std::size_t n) {
  if (model.grid.size() < 2) throw ContractViolation("posterior_drift_curve: grid too small");
  if (model.observations.size() < n)
    throw ContractViolation("posterior_drift_curve: not enough observations");
  const auto g = model.grid.size();

  auto normalize = [&](const Eigen::VectorXd& logp) {
    const double m = logp.maxCoeff();
    Eigen::VectorXd p = (logp.array() - m).exp();
    return Eigen::VectorXd(p / p.sum());
  };

  Eigen::VectorXd log_post = model.log_prior;
  Eigen::VectorXd prev = normalize(log_post);
  std::vector<double> alpha;
  alpha.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    for (Eigen::Index j = 0; j < g; ++j)
      log_post(j) += model.log_lik(model.grid(j), model.observations[t]);
    const Eigen::VectorXd cur = normalize(log_post);
    alpha.push_back(0.5 * l1_distance(cur, prev));
    prev = cur;
  }
  return alpha;
}

Eigen::VectorXd random_distribution(std::size_t n_states, RngStream& rng) {
  std::vector<double> conc(n_states, 1.0);
  const std::vector<double> d = rng.dirichlet(conc);
  Eigen::VectorXd out(static_cast<Eigen::Index>(n_states));
  for (std::size_t i = 0; i < n_states; ++i) out(static_cast<Eigen::Index>(i)) = d[i];
  return out;
}

FiniteChain random_chain(std::size_t n_states, RngStream& rng) {
  const auto n = static_cast<Eigen::Index>(n_states);
  for (;;) {
    const Eigen::VectorXd common = random_distribution(n_states, rng);
    const double u = 0.2 + 0.75 * rng.uniform();
    Eigen::MatrixXd T(n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
      const Eigen::VectorXd row = random_distribution(n_states, rng);
      T.row(x) = u * common.transpose() + (1.0 - u) * row.transpose();
    }
    FiniteChain chain{T, stationary_of(T)};
    if (chain.pi.minCoeff() <= 1e-6) continue;
    if (uniform_rho(chain) < 0.999) return chain;
  }
}

FiniteChain random_reversible_chain(std::size_t n_states, RngStream& rng) {
  const auto n = static_cast<Eigen::Index>(n_states);
  Eigen::MatrixXd W(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = x; y < n; ++y) {
      const double w = 0.05 + rng.uniform();
      W(x, y) = w;
      W(y, x) = w;
    }
  const Eigen::VectorXd row_sum = W.rowwise().sum();
  Eigen::MatrixXd T = W.array().colwise() / row_sum.array();
  FiniteChain chain{T, Eigen::VectorXd(row_sum / row_sum.sum())};
  return chain;
}

SmcmcInstance random_smcmc_instance(std::size_t n_states, std::size_t t_max, int m_max,
                                    RngStream& rng) {
  const auto n = static_cast<Eigen::Index>(n_states);
  SmcmcInstance inst;
  inst.p0 = random_distribution(n_states, rng);
  Eigen::VectorXd pi = inst.p0;
  for (std::size_t t = 0; t < t_max; ++t) {
    // Drift the target by a small random log tilt; redraw the step until
    // the kernel satisfies the checks' rho_t < 1 precondition.
    for (;;) {
      Eigen::VectorXd tilt(n);
      const double scale = 0.05 + 0.4 * rng.uniform();
      for (Eigen::Index j = 0; j < n; ++j) tilt(j) = std::exp(scale * rng.normal());
      Eigen::VectorXd pit = pi.cwiseProduct(tilt);
      pit /= pit.sum();

      // Metropolis kernel targeting pit, mixed with an independence part.
      Eigen::MatrixXd prop(n, n);
      for (Eigen::Index x = 0; x < n; ++x) {
        Eigen::VectorXd row(n);
        for (Eigen::Index y = 0; y < n; ++y) row(y) = 0.05 + rng.uniform();
        row(x) = 0.0;
        prop.row(x) = row.transpose() / row.sum();
      }
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
      for (Eigen::Index x = 0; x < n; ++x) {
        double stay = 1.0;
        for (Eigen::Index y = 0; y < n; ++y) {
          if (x == y) continue;
          const double acc =
              std::min(1.0, (pit(y) * prop(y, x)) / (pit(x) * prop(x, y)));
          M(x, y) = prop(x, y) * acc;
          stay -= M(x, y);
        }
        M(x, x) = stay;
      }
      const double u = 0.3 + 0.6 * rng.uniform();
      Eigen::MatrixXd T(n, n);
      for (Eigen::Index x = 0; x < n; ++x)
        T.row(x) = u * pit.transpose() + (1.0 - u) * M.row(x);
      FiniteChain chain{T, pit};
      if (uniform_rho(chain) >= 0.999) continue;
      pi = pit;
      inst.chains.push_back(std::move(chain));
      break;
    }
    inst.m.push_back(1 + static_cast<int>(rng.raw() % static_cast<std::uint64_t>(m_max)));
  }
  return inst;
}

}  // namespace smcmc::theory
