#include "smcmc/ensemble.hpp"

#include <chrono>
#include <cmath>

#include "smcmc/errors.hpp"
#include "smcmc/parallel.hpp"

namespace smcmc {

void ScheduleConfig::validate() const {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw ConfigError("epsilon must lie in (0, 1)");
  if (m_min < 1) throw ConfigError("m_min must be >= 1");
  if (m_min > m_cap) throw ConfigError("m_min must not exceed m_cap");
  if (diag_stride < 1) throw ConfigError("diag_stride must be >= 1");
  if (batch_sizes.empty()) throw ConfigError("batch_sizes must not be empty");
  for (std::size_t b : batch_sizes)
    if (b < 1) throw ConfigError("batch sizes must be >= 1");
}

std::size_t RunReport::total_sweeps() const {
  std::size_t total = 0;
  for (const auto& s : steps) total += s.m;
  return total;
}

Ensemble init_ensemble(const std::function<ParameterVector(RngStream&)>& prior_sampler,
                       std::size_t n_chains, std::uint64_t master_seed) {
  if (n_chains < 2) throw ConfigError("ensemble needs at least 2 chains");
  Ensemble ens;
  ens.states.reserve(n_chains);
  ens.streams.reserve(n_chains);
  for (std::size_t l = 0; l < n_chains; ++l) {
    ens.streams.push_back(RngStream::split(master_seed, l));
    ens.states.push_back(prior_sampler(ens.streams.back()));
  }
  for (std::size_t l = 1; l < n_chains; ++l)
    if (!ens.states[l].same_structure(ens.states[0]))
      throw ContractViolation("prior sampler produced inconsistent block structure");
  return ens;
}

AcfSnapshot extract_snapshot(const Ensemble& ens, const KernelSuite& suite) {
  AcfSnapshot snap(ens.size(), suite.diag_components.size());
  for (std::size_t l = 0; l < ens.size(); ++l)
    for (std::size_t j = 0; j < suite.diag_components.size(); ++j)
      snap.at(l, j) =
          ens.states[l].component(suite.diag_components[j].first, suite.diag_components[j].second);
  return snap;
}

StepRecord advance_step(Ensemble& ens, const KernelSuite& suite, const ScheduleConfig& sched,
                        std::size_t workers) {
  sched.validate();
  if (ens.size() < 2) throw ContractViolation("advance_step: ensemble has fewer than 2 chains");
  if (suite.data_horizon <= ens.data_horizon)
    throw ContractViolation("advance_step: data horizon must strictly increase");
  if (suite.diag_components.empty())
    throw ContractViolation("advance_step: suite declares no diagnostic components");

  const auto start = std::chrono::steady_clock::now();
  const std::size_t L = ens.size();

  // Jump; Eq. (2) contract: pre-existing blocks stay bitwise unchanged.
  const std::size_t blocks_before = ens.states[0].block_count();
  std::vector<ParameterVector> before(ens.states);
  parallel_for(L, workers, [&](std::size_t l) { suite.jump(ens.states[l], ens.streams[l]); });
  for (std::size_t l = 0; l < L; ++l) {
    if (!ens.states[l].prefix_identical(before[l], blocks_before))
      throw ContractViolation("jump modified pre-existing blocks");
    if (!ens.states[l].same_structure(ens.states[0]))
      throw ContractViolation("jump produced inconsistent block structure across chains");
  }

  StepRecord rec;
  rec.t = ens.t + 1;
  rec.horizon = suite.data_horizon;

  const AcfSnapshot base = extract_snapshot(ens, suite);
  const std::size_t before_dim = ens.states[0].dim();

  std::size_t m = 1;  // the post-jump state is draw s = 1
  for (;;) {
    if (m >= sched.m_cap) {
      rec.capped = true;
      break;
    }
    parallel_for(L, workers,
                 [&](std::size_t l) { suite.transit(ens.states[l], ens.streams[l]); });
    ++m;
    for (std::size_t l = 0; l < L; ++l)
      if (ens.states[l].dim() != before_dim)
        throw ContractViolation("transit changed the state dimension");

    const std::size_t lag = m - 1;
    if (lag % sched.diag_stride != 0) continue;
    const AcfSnapshot current = extract_snapshot(ens, suite);
    const auto rho = cross_chain_acf(base, current);
    if (rho) {
      rec.fhat.push_back({lag, *rho, true});
    } else {
      rec.fhat.push_back({lag, 1.0, false});
      rec.degenerate = true;
    }
    const double effective = rho ? *rho : 1.0;
    if (m >= sched.m_min && effective <= 1.0 - sched.epsilon) break;
  }

  rec.m = m;
  ens.t += 1;
  ens.data_horizon = suite.data_horizon;
  ens.history.push_back(m);
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

RunReport run_stream(std::span<const Observation> data, const Model& model,
                     const ScheduleConfig& sched, std::size_t n_chains, std::uint64_t seed,
                     std::size_t workers, bool keep_trace) {
  sched.validate();
  if (data.empty()) throw ConfigError("run_stream: data source is empty");

  RunReport report;
  report.final_ensemble =
      init_ensemble([&](RngStream& rng) { return model.sample_prior(rng); }, n_chains, seed);
  Ensemble& ens = report.final_ensemble;

  std::size_t horizon = 0;
  std::size_t step = 0;
  while (horizon < data.size()) {
    const std::size_t bs =
        sched.batch_sizes[std::min(step, sched.batch_sizes.size() - 1)];
    const std::size_t new_horizon = std::min(horizon + bs, data.size());
    for (std::size_t i = horizon; i < new_horizon; ++i) {
      try {
        model.validate(data[i]);
      } catch (const ModelError& e) {
        throw ModelError("step " + std::to_string(step + 1) + ", observation " +
                         std::to_string(i + 1) + ": " + e.what());
      }
    }
    const KernelSuite suite = model.make_suite(data.first(new_horizon), horizon);
    if (suite.data_horizon != new_horizon)
      throw ContractViolation("model suite reports wrong data horizon");
    StepRecord rec = advance_step(ens, suite, sched, workers);
    rec.summaries = model.summarize(ens);
    if (keep_trace) report.trace.push_back(extract_snapshot(ens, suite));
    report.steps.push_back(std::move(rec));
    horizon = new_horizon;
    ++step;
  }
  return report;
}

}  // namespace smcmc
