#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smcmc/diagnostics.hpp"
#include "smcmc/param_vector.hpp"
#include "smcmc/rng.hpp"

namespace smcmc {

// Per-step schedule: stopping threshold, sweep bounds, diagnostic stride
// and the data batch pattern (last entry repeats until the source is drained).
struct ScheduleConfig {
  double epsilon = 0.5;
  std::size_t m_cap = 2000;
  std::size_t m_min = 2;
  std::size_t diag_stride = 1;
  std::vector<std::size_t> batch_sizes;

  void validate() const;
};

// A time step's kernel pair, bound to the data observed through the step.
// `jump` may only append blocks; `transit` is one full sweep leaving the
// step's posterior invariant.
struct KernelSuite {
  std::function<void(ParameterVector&, RngStream&)> jump;
  std::function<void(ParameterVector&, RngStream&)> transit;
  std::vector<std::pair<std::string, std::size_t>> diag_components;
  std::size_t data_horizon = 0;
};

// L chain states at a synchronization barrier plus their private streams.
struct Ensemble {
  std::vector<ParameterVector> states;
  std::vector<RngStream> streams;
  std::size_t t = 0;
  std::size_t data_horizon = 0;
  std::vector<std::size_t> history;  // m_1..m_t

  std::size_t size() const { return states.size(); }
};

struct FhatPoint {
  std::size_t lag = 0;
  double value = 0.0;
  bool defined = false;
};

struct StepRecord {
  std::size_t t = 0;
  std::size_t horizon = 0;
  std::size_t m = 0;
  bool capped = false;
  bool degenerate = false;  // stopping rule was undefined at some sweep
  std::vector<FhatPoint> fhat;
  double wall_seconds = 0.0;
  std::vector<std::pair<std::string, double>> summaries;
};

// Record batch element; the model interprets the columns.
struct Observation {
  std::vector<double> values;
};

// Model plug-in: prior sampler, suite factory over an observation prefix,
// and a per-step summary extractor.
class Model {
 public:
  virtual ~Model() = default;
  virtual ParameterVector sample_prior(RngStream& rng) const = 0;
  // `data` is the full prefix observed through the new step; the step's
  // batch is data[prev_horizon, data.size()).
  virtual KernelSuite make_suite(std::span<const Observation> data,
                                 std::size_t prev_horizon) const = 0;
  virtual std::vector<std::pair<std::string, double>> summarize(const Ensemble& ens) const = 0;
  // Throws ModelError on schema mismatch.
  virtual void validate(const Observation& obs) const = 0;
};

struct RunReport {
  std::vector<StepRecord> steps;
  Ensemble final_ensemble;
  // Monitored components per step per chain (kept only when requested).
  std::vector<AcfSnapshot> trace;

  std::size_t total_sweeps() const;
};

// Draws L prior states with per-chain streams split from the master seed.
Ensemble init_ensemble(const std::function<ParameterVector(RngStream&)>& prior_sampler,
                       std::size_t n_chains, std::uint64_t master_seed);

// One data step: jump once per chain, then transit sweeps until the
// cross-chain stopping rule fires (or m_cap). Deterministic for any
// worker count.
StepRecord advance_step(Ensemble& ens, const KernelSuite& suite, const ScheduleConfig& sched,
                        std::size_t workers);

// Full streaming run over `data` with batches cut per sched.batch_sizes.
RunReport run_stream(std::span<const Observation> data, const Model& model,
                     const ScheduleConfig& sched, std::size_t n_chains, std::uint64_t seed,
                     std::size_t workers, bool keep_trace = false);

// Snapshot of the suite's monitored components across the ensemble.
AcfSnapshot extract_snapshot(const Ensemble& ens, const KernelSuite& suite);

}  // namespace smcmc
