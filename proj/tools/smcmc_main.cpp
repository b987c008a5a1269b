#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "smcmc/errors.hpp"
#include "smcmc/io.hpp"
#include "smcmc/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sequential MCMC: streaming posterior sampling with adaptive per-step sweeps"};
  app.require_subcommand(1);

  std::string config_path;
  std::string manifest_path;
  auto* run = app.add_subcommand("run", "Execute a configured run");
  auto* config_opt = run->add_option("config", config_path, "Path to a JSON config");
  run->add_option("--from-manifest", manifest_path,
                  "Reproduce a previous run from its manifest.json");

  std::size_t instances = 100;
  std::uint64_t verify_seed = 1;
  std::string verify_out = "out/verify";
  auto* verify = app.add_subcommand("verify", "Run the finite-state theory verification suite");
  verify->add_option("--instances", instances, "Random instances per check");
  verify->add_option("--seed", verify_seed, "Instance generator seed");
  verify->add_option("--out", verify_out, "Output directory for verify.csv");

  std::vector<std::string> summary_paths;
  std::string table_out;
  auto* summarize = app.add_subcommand("summarize", "Aggregate run summaries into one table");
  summarize->add_option("summaries", summary_paths, "summary.csv files from runs")->required();
  summarize->add_option("--out", table_out, "Write the aggregated table to this CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      smcmc::io::RunConfig config;
      if (!manifest_path.empty()) {
        std::ifstream in(manifest_path);
        if (!in) throw smcmc::ConfigError("cannot open manifest: " + manifest_path);
        const auto doc = smcmc::io::json::parse(in);
        if (!doc.contains("config"))
          throw smcmc::ConfigError("manifest has no 'config' object: " + manifest_path);
        config = smcmc::io::parse_config(doc.at("config"));
      } else if (!config_path.empty()) {
        config = smcmc::io::load_config(config_path);
      } else {
        throw smcmc::ConfigError("run needs a config path or --from-manifest");
      }
      (void)config_opt;
      return smcmc::runner::execute_run(config, std::cout);
    }
    if (*verify) {
      const auto table = smcmc::runner::run_verify(instances, verify_seed, verify_out, std::cout);
      return smcmc::runner::all_passed(table) ? 0 : 1;
    }
    if (*summarize) return smcmc::runner::summarize(summary_paths, table_out, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
