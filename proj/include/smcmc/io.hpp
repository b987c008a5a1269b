#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "smcmc/baselines.hpp"
#include "smcmc/ensemble.hpp"
#include "smcmc/gp_probit.hpp"
#include "smcmc/mixture.hpp"

namespace smcmc::io {

using json = nlohmann::ordered_json;

struct SyntheticSpec {
  std::string kind;  // "mixture" | "gp"
  std::size_t n = 0;
  std::uint64_t seed = 0;
  mixture::MixtureTruth mixture_truth;  // kind == "mixture"
};

struct PredictionGrid {
  bool enabled = false;
  double min = -2.0;
  double max = 2.0;
  std::size_t points = 20;
};

struct RunConfig {
  std::string algorithm;  // smcmc | mcmc | smc | verify
  std::string model;      // mixture | gp
  std::uint64_t seed = 1;
  std::size_t chains = 200;
  std::size_t workers = 1;
  std::string output_dir = "out";
  bool keep_trace = false;

  ScheduleConfig schedule;
  mixture::MixtureHyper mixture_hyper;
  mixture::InitSpec mixture_init;
  gp::GpConfig gp_config;
  PredictionGrid prediction_grid;

  std::size_t mcmc_sweeps = 0;  // algorithm == mcmc
  baselines::SmcConfig smc_config;

  std::string data_path;    // exactly one of path / synthetic
  std::string data_format;  // mixture | gp | heart
  bool has_synthetic = false;
  SyntheticSpec synthetic;

  // verify subcommand
  std::size_t verify_instances = 100;

  void validate() const;
};

RunConfig parse_config(const json& doc);
RunConfig load_config(const std::string& path);

// Canonical serialization: fixed key order, 17 significant digits.
json canonical_config(const RunConfig& config);
std::string config_hash(const json& canonical);

std::string format_double(double v);

// CSV ingestion. Schemas:
//   mixture: single column y
//   gp:      columns x1..xd, y with y in {0, 1}
//   heart:   named columns sbp, obesity, age (others ignored);
//            emits x = (obesity, age), y = I(sbp > 139)
std::vector<Observation> load_csv(const std::string& path, const std::string& schema);

std::vector<Observation> make_synthetic(const SyntheticSpec& spec);

// In-place standardization of all covariate columns (all but the last) to
// zero mean, unit variance.
void standardize_covariates(std::vector<Observation>& data);

void write_text_file(const std::string& path, const std::string& content);

// Writes report.json, run.csv, fhat.csv, timings.csv and manifest.json.
// timings.csv is the only file excluded from the byte-identity contract.
void emit_report(const RunReport& report, const RunConfig& config, const std::string& outdir);

// One Table-1-style row: algorithm tag, batch size, sorted means, sd.
void emit_summary_row(const std::string& path, const std::string& algorithm,
                      std::size_t batch_size, const mixture::SortedMeans& summary,
                      std::size_t total_sweeps);

// GP prediction surface on a square grid of standardized covariates.
void emit_prediction_grid(const std::string& path, const Ensemble& ens,
                          const gp::CholeskyCache& cache, const PredictionGrid& grid);

}  // namespace smcmc::io
