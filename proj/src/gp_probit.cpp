#include "smcmc/gp_probit.hpp"

#include <boost/math/distributions/gamma.hpp>
#include <cmath>

#include "smcmc/errors.hpp"

namespace smcmc::gp {

namespace {
constexpr double kVarianceFloor = 1e-10;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

void GpConfig::validate() const {
  if (!(sigma2 > 0.0)) throw ConfigError("gp sigma2 must be positive");
  if (grid_size < 1) throw ConfigError("gp grid_size must be >= 1");
  if (!(prior_shape > 0.0) || !(prior_rate > 0.0) || !(prior_power > 0.0))
    throw ConfigError("gp powered-gamma prior parameters must be positive");
  if (jump_rounds < 1) throw ConfigError("gp jump_rounds must be >= 1");
  if (!(jitter >= 0.0)) throw ConfigError("gp jitter must be nonnegative");
  if (max_diag_sites < 1) throw ConfigError("gp max_diag_sites must be >= 1");
}

std::vector<double> build_grid(std::size_t H, double shape, double rate, double power) {
  if (H < 2) throw ConfigError("bandwidth grid needs at least 2 points");
  if (!(shape > 0.0) || !(rate > 0.0) || !(power > 0.0))
    throw ConfigError("powered gamma prior parameters must be positive");
  const boost::math::gamma_distribution<double> dist(shape, 1.0 / rate);
  std::vector<double> grid(H);
  for (std::size_t h = 0; h < H; ++h) {
    const double p = (h == 0) ? 1.0 / (2.0 * static_cast<double>(H))
                              : static_cast<double>(h) / static_cast<double>(H);
    grid[h] = std::pow(boost::math::quantile(dist, p), 1.0 / power);
  }
  return grid;
}

CholeskyCache::CholeskyCache(std::vector<double> grid, double sigma2, double jitter, bool fresh)
    : grid_(std::move(grid)), sigma2_(sigma2), jitter_(jitter), fresh_(fresh) {
  if (grid_.empty()) throw ConfigError("CholeskyCache needs a nonempty grid");
  factors_.resize(grid_.size());
}

double CholeskyCache::corr(std::size_t h, const Eigen::VectorXd& a,
                           const Eigen::VectorXd& b) const {
  const double a_h = grid_[h];
  return std::exp(-a_h * a_h * (a - b).squaredNorm());
}

Eigen::VectorXd CholeskyCache::corr_vector(std::size_t h, const Eigen::VectorXd& x,
                                           std::size_t t) const {
  Eigen::VectorXd c(static_cast<Eigen::Index>(t));
  for (std::size_t i = 0; i < t; ++i)
    c(static_cast<Eigen::Index>(i)) = corr(h, sites_[i], x);
  return c;
}

void CholeskyCache::append_one(Factors& f, std::size_t h, const Eigen::VectorXd& x_new) {
  const auto t = static_cast<Eigen::Index>(sites_.size());  // sites_ not yet extended
  const double c_diag = 1.0 + jitter_;
  const double p_diag = sigma2_ * c_diag + 1.0;

  f.Lc.conservativeResize(t + 1, t + 1);
  f.Lc_inv.conservativeResize(t + 1, t + 1);
  f.Lp.conservativeResize(t + 1, t + 1);
  f.Lp_inv.conservativeResize(t + 1, t + 1);
  if (t > 0) {
    f.Lc.col(t).head(t).setZero();
    f.Lc_inv.col(t).head(t).setZero();
    f.Lp.col(t).head(t).setZero();
    f.Lp_inv.col(t).head(t).setZero();
  }

  const Eigen::VectorXd c = corr_vector(h, x_new, sites_.size());

  // Correlation factor: d, B, g, E row appends.
  {
    const Eigen::VectorXd u = f.Lc_inv.topLeftCorner(t, t) * c;
    double d2 = c_diag - u.squaredNorm();
    if (d2 <= kVarianceFloor) {
      d2 = kVarianceFloor;
      flagged_ = true;
    }
    const double d = std::sqrt(d2);
    const double g = 1.0 / d;
    f.Lc.row(t).head(t) = u.transpose();
    f.Lc(t, t) = d;
    f.Lc_inv.row(t).head(t) =
        -g * (f.Lc_inv.topLeftCorner(t, t).transpose() * u).transpose();
    f.Lc_inv(t, t) = g;
    f.logdet_C += 2.0 * std::log(d);
  }

  // Same recursion for sigma2*(C + jitter I) + I.
  {
    const Eigen::VectorXd cp = sigma2_ * c;
    const Eigen::VectorXd u = f.Lp_inv.topLeftCorner(t, t) * cp;
    double d2 = p_diag - u.squaredNorm();
    if (d2 <= kVarianceFloor) {
      d2 = kVarianceFloor;
      flagged_ = true;
    }
    const double d = std::sqrt(d2);
    const double g = 1.0 / d;
    f.Lp.row(t).head(t) = u.transpose();
    f.Lp(t, t) = d;
    f.Lp_inv.row(t).head(t) =
        -g * (f.Lp_inv.topLeftCorner(t, t).transpose() * u).transpose();
    f.Lp_inv(t, t) = g;
  }
}

void CholeskyCache::rebuild(Factors& f, std::size_t h) {
  const auto t = static_cast<Eigen::Index>(sites_.size());
  Eigen::MatrixXd C(t, t);
  for (Eigen::Index i = 0; i < t; ++i) {
    C(i, i) = 1.0 + jitter_;
    for (Eigen::Index j = 0; j < i; ++j) {
      C(i, j) = corr(h, sites_[static_cast<std::size_t>(i)], sites_[static_cast<std::size_t>(j)]);
      C(j, i) = C(i, j);
    }
  }
  const Eigen::MatrixXd P = sigma2_ * C + Eigen::MatrixXd::Identity(t, t);
  Eigen::LLT<Eigen::MatrixXd> lltC(C);
  Eigen::LLT<Eigen::MatrixXd> lltP(P);
  if (lltC.info() != Eigen::Success || lltP.info() != Eigen::Success)
    throw ModelError("fresh factorization failed; kernel matrix not positive definite");
  f.Lc = lltC.matrixL();
  f.Lp = lltP.matrixL();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(t, t);
  f.Lc_inv = f.Lc.triangularView<Eigen::Lower>().solve(I);
  f.Lp_inv = f.Lp.triangularView<Eigen::Lower>().solve(I);
  f.logdet_C = 2.0 * f.Lc.diagonal().array().log().sum();
}

void CholeskyCache::append(const Eigen::VectorXd& x_new) {
  if (!sites_.empty() && sites_[0].size() != x_new.size())
    throw ContractViolation("CholeskyCache: covariate dimension changed");
  if (fresh_) {
    sites_.push_back(x_new);
    for (std::size_t h = 0; h < grid_.size(); ++h) rebuild(factors_[h], h);
    return;
  }
  for (std::size_t h = 0; h < grid_.size(); ++h) append_one(factors_[h], h, x_new);
  sites_.push_back(x_new);
}

GpState unpack_gp_state(const ParameterVector& params) {
  GpState state;
  const std::vector<double> f = params.gather_prefix("f@");
  const std::vector<double> z = params.gather_prefix("z@");
  state.f.resize(static_cast<Eigen::Index>(f.size()));
  state.z.resize(static_cast<Eigen::Index>(z.size()));
  for (std::size_t i = 0; i < f.size(); ++i) state.f(static_cast<Eigen::Index>(i)) = f[i];
  for (std::size_t i = 0; i < z.size(); ++i) state.z(static_cast<Eigen::Index>(i)) = z[i];
  state.h = static_cast<std::size_t>(params.component("h", 0));
  return state;
}

void write_back_gp(const GpState& state, ParameterVector& params) {
  params.scatter_prefix(
      "f@", std::span<const double>(state.f.data(), static_cast<std::size_t>(state.f.size())));
  params.scatter_prefix(
      "z@", std::span<const double>(state.z.data(), static_cast<std::size_t>(state.z.size())));
  params.mutable_values("h")[0] = static_cast<double>(state.h);
}

void gibbs_sweep_gp(GpState& state, std::span<const double> y, const CholeskyCache& cache,
                    RngStream& rng) {
  const auto t = state.f.size();
  if (static_cast<std::size_t>(t) != cache.horizon() ||
      static_cast<std::size_t>(t) != y.size() || state.z.size() != t)
    throw ContractViolation("gibbs_sweep_gp: cache/data horizon mismatch");
  if (t == 0) throw ContractViolation("gibbs_sweep_gp: empty state");
  const std::size_t h = state.h;
  const double sigma2 = cache.sigma2();
  const double sigma = std::sqrt(sigma2);

  // z_i | f_i, y_i: unit-variance normal truncated by the response sign.
  for (Eigen::Index i = 0; i < t; ++i)
    state.z(i) = (y[static_cast<std::size_t>(i)] > 0.5)
                     ? rng.truncated_normal_lower(state.f(i), 1.0, 0.0)
                     : rng.truncated_normal_upper(state.f(i), 1.0, 0.0);

  // F | z, h: joint draw via a prior sample conditioned on the residual,
  // using P = K + I so that cov = K - K P^{-1} K and mean = K P^{-1} z.
  {
    Eigen::VectorXd xi1(t), xi2(t);
    for (Eigen::Index i = 0; i < t; ++i) xi1(i) = rng.normal();
    for (Eigen::Index i = 0; i < t; ++i) xi2(i) = rng.normal();
    const Eigen::MatrixXd& Lc = cache.Lc(h);
    Eigen::VectorXd f0 = Lc.triangularView<Eigen::Lower>() * xi1;
    f0 *= sigma;
    const Eigen::VectorXd delta = state.z - (f0 + xi2);
    const Eigen::MatrixXd& Lp_inv = cache.Lp_inv(h);
    const Eigen::VectorXd s =
        Lp_inv.transpose().triangularView<Eigen::Upper>() *
        (Lp_inv.triangularView<Eigen::Lower>() * delta);
    state.f = f0 + delta - s;
  }

  // h | F: discrete posterior over the bandwidth grid (uniform prior).
  if (cache.grid_size() > 1) {
    std::vector<double> logits(cache.grid_size());
    const double tlog = static_cast<double>(t) * std::log(sigma2);
    for (std::size_t g = 0; g < cache.grid_size(); ++g) {
      const Eigen::VectorXd v =
          cache.Lc_inv(g).triangularView<Eigen::Lower>() * state.f;
      logits[g] = -0.5 * (tlog + cache.logdet_C(g) + v.squaredNorm() / sigma2);
    }
    state.h = rng.categorical_logits(logits);
  }
}

void jump_new_site(GpState& state, double y_new, std::size_t site_index,
                   const CholeskyCache& cache, std::size_t rounds, RngStream& rng) {
  if (site_index >= cache.horizon())
    throw ContractViolation("jump_new_site: cache not appended through the new site");
  if (static_cast<std::size_t>(state.f.size()) != site_index)
    throw ContractViolation("jump_new_site: state not at the new site");
  const std::size_t h = state.h;
  const auto i = static_cast<Eigen::Index>(site_index);
  const Eigen::MatrixXd& Lc = cache.Lc(h);

  // Conditional prior f(x_new) | F: mean u.w, variance sigma2 d^2, where
  // (u, d) is the appended Cholesky row for this site.
  double mean0 = 0.0;
  const double d = Lc(i, i);
  const double var0 = std::max(cache.sigma2() * d * d, kVarianceFloor);
  if (i > 0) {
    const Eigen::VectorXd u = Lc.row(i).head(i).transpose();
    const Eigen::VectorXd w =
        cache.Lc_inv(h).topLeftCorner(i, i).triangularView<Eigen::Lower>() * state.f;
    mean0 = u.dot(w);
  }

  double f_new = rng.normal(mean0, std::sqrt(var0));
  double z_new = (y_new > 0.5) ? rng.truncated_normal_lower(f_new, 1.0, 0.0)
                               : rng.truncated_normal_upper(f_new, 1.0, 0.0);
  for (std::size_t round = 1; round < rounds; ++round) {
    const double prec = 1.0 / var0 + 1.0;
    const double m = (mean0 / var0 + z_new) / prec;
    f_new = rng.normal(m, std::sqrt(1.0 / prec));
    z_new = (y_new > 0.5) ? rng.truncated_normal_lower(f_new, 1.0, 0.0)
                          : rng.truncated_normal_upper(f_new, 1.0, 0.0);
  }

  state.f.conservativeResize(i + 1);
  state.z.conservativeResize(i + 1);
  state.f(i) = f_new;
  state.z(i) = z_new;
}

std::vector<double> predict_many(const Ensemble& ens,
                                 std::span<const Eigen::VectorXd> points,
                                 const CholeskyCache& cache) {
  const auto t = static_cast<Eigen::Index>(cache.horizon());
  const double sigma2 = cache.sigma2();
  std::vector<double> out(points.size(), 0.0);

  if (t == 0) {
    for (auto& p : out) p = 0.5;
    return out;
  }

  // Per-chain whitened latents, grouped by bandwidth index.
  std::vector<Eigen::VectorXd> whitened(ens.size());
  std::vector<std::size_t> idx(ens.size());
  for (std::size_t l = 0; l < ens.size(); ++l) {
    const GpState st = unpack_gp_state(ens.states[l]);
    idx[l] = st.h;
    whitened[l] = cache.Lc_inv(st.h).triangularView<Eigen::Lower>() * st.f;
  }

  for (std::size_t pt = 0; pt < points.size(); ++pt) {
    std::vector<Eigen::VectorXd> u_h(cache.grid_size());
    std::vector<double> var_h(cache.grid_size(), -1.0);
    double acc = 0.0;
    for (std::size_t l = 0; l < ens.size(); ++l) {
      const std::size_t h = idx[l];
      if (var_h[h] < 0.0) {
        const Eigen::VectorXd c = cache.corr_vector(h, points[pt], cache.horizon());
        u_h[h] = cache.Lc_inv(h).triangularView<Eigen::Lower>() * c;
        var_h[h] =
            std::max(0.0, sigma2 * (1.0 + cache.jitter() - u_h[h].squaredNorm()));
      }
      const double mean = u_h[h].dot(whitened[l]);
      acc += normal_cdf(mean / std::sqrt(1.0 + var_h[h]));
    }
    out[pt] = acc / static_cast<double>(ens.size());
  }
  return out;
}

double predict(const Ensemble& ens, const Eigen::VectorXd& x_star, const CholeskyCache& cache) {
  const Eigen::VectorXd pts[] = {x_star};
  return predict_many(ens, pts, cache)[0];
}

GpModel::GpModel(GpConfig config) : config_(config) {
  config_.validate();
  grid_ = build_grid(config_.grid_size < 2 ? 2 : config_.grid_size, config_.prior_shape,
                     config_.prior_rate, config_.prior_power);
  grid_.resize(config_.grid_size);  // H = 1 keeps only the low quantile
  cache_ = std::make_unique<CholeskyCache>(grid_, config_.sigma2, config_.jitter,
                                           config_.fresh_factorization);
}

ParameterVector GpModel::sample_prior(RngStream& rng) const {
  ParameterVector params;
  const auto h = static_cast<double>(rng.raw() % grid_.size());
  params.append_block("h", {h});
  return params;
}

KernelSuite GpModel::make_suite(std::span<const Observation> data,
                                std::size_t prev_horizon) const {
  if (data.empty()) throw ContractViolation("gp suite needs data");
  const std::size_t dim = data[0].values.size() - 1;
  if (dim < 1) throw ModelError("gp observations need at least one covariate column");

  if (cache_->horizon() > prev_horizon)  // model reused for a new run
    cache_ = std::make_unique<CholeskyCache>(grid_, config_.sigma2, config_.jitter,
                                             config_.fresh_factorization);
  for (std::size_t i = cache_->horizon(); i < data.size(); ++i) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(dim));
    for (std::size_t d = 0; d < dim; ++d) x(static_cast<Eigen::Index>(d)) = data[i].values[d];
    cache_->append(x);
  }

  std::vector<double> y(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) y[i] = data[i].values.back();

  KernelSuite suite;
  suite.data_horizon = data.size();
  const CholeskyCache* cache = cache_.get();
  const std::size_t rounds = config_.jump_rounds;

  suite.jump = [y, prev_horizon, cache, rounds](ParameterVector& params, RngStream& rng) {
    GpState state = unpack_gp_state(params);
    for (std::size_t i = prev_horizon; i < y.size(); ++i) {
      jump_new_site(state, y[i], i, *cache, rounds, rng);
      params.append_block("f@" + std::to_string(i + 1),
                          {state.f(static_cast<Eigen::Index>(i))});
      params.append_block("z@" + std::to_string(i + 1),
                          {state.z(static_cast<Eigen::Index>(i))});
    }
  };
  suite.transit = [y, cache](ParameterVector& params, RngStream& rng) {
    GpState state = unpack_gp_state(params);
    gibbs_sweep_gp(state, y, *cache, rng);
    write_back_gp(state, params);
  };
  const std::size_t monitored = std::min(data.size(), config_.max_diag_sites);
  for (std::size_t i = 0; i < monitored; ++i)
    suite.diag_components.emplace_back("f@" + std::to_string(i + 1), 0);
  return suite;
}

std::vector<std::pair<std::string, double>> GpModel::summarize(const Ensemble& ens) const {
  double h_mean = 0.0, f1_mean = 0.0;
  const bool has_f = ens.states[0].has_block("f@1");
  for (const auto& st : ens.states) {
    h_mean += st.component("h", 0);
    if (has_f) f1_mean += st.component("f@1", 0);
  }
  h_mean /= static_cast<double>(ens.size());
  f1_mean /= static_cast<double>(ens.size());
  return {{"h_mean", h_mean}, {"f1_mean", f1_mean}};
}

void GpModel::validate(const Observation& obs) const {
  if (obs.values.size() < 2)
    throw ModelError("gp expects covariate columns plus a binary response");
  for (double v : obs.values)
    if (!std::isfinite(v)) throw ModelError("non-finite observation value");
  const double y = obs.values.back();
  if (y != 0.0 && y != 1.0) throw ModelError("gp response must be 0 or 1");
}

}  // namespace smcmc::gp
