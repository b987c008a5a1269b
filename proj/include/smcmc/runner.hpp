#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "smcmc/io.hpp"

namespace smcmc::runner {

// Executes one configured run (smcmc / mcmc / smc) and writes its outputs.
// Returns the process exit code.
int execute_run(const io::RunConfig& config, std::ostream& log);

struct VerifySummary {
  std::string check;
  std::size_t instances = 0;
  std::size_t comparisons = 0;
  double max_violation = 0.0;
  double margin_p00 = 0.0;  // min margin
  double margin_p25 = 0.0;
  double margin_p50 = 0.0;
  bool passed = false;
};

// Runs the finite-state verification suite: `instances` random 4-6-state
// instances per check. Writes a pass/fail table CSV when outdir is nonempty.
std::vector<VerifySummary> run_verify(std::size_t instances, std::uint64_t seed,
                                      const std::string& outdir, std::ostream& log);

bool all_passed(const std::vector<VerifySummary>& table);

// Aggregates several runs' summary.csv files into a Table-1-style table
// (average sorted means per (algorithm, batch size), sd of the averages).
int summarize(const std::vector<std::string>& summary_csvs, const std::string& out_path,
              std::ostream& log);

}  // namespace smcmc::runner
