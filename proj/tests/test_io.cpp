#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "smcmc/errors.hpp"
#include "smcmc/io.hpp"
#include "smcmc/runner.hpp"

using namespace smcmc;
using namespace smcmc::io;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("smcmc_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

json minimal_mixture_config() {
  return json{{"algorithm", "smcmc"},
              {"model", "mixture"},
              {"data",
               {{"synthetic",
                 {{"kind", "mixture"},
                  {"n", 12},
                  {"seed", 5},
                  {"mu", {-1.0, 1.0}},
                  {"lambda", {1.0, 1.0}},
                  {"w", {0.5, 0.5}}}}}},
              {"mixture", {{"k", 2}}},
              {"chains", 8},
              {"seed", 3},
              {"schedule", {{"m_cap", 50}}}};
}

}  // namespace

TEST_CASE("minimal config parses with defaults") {
  const RunConfig config = parse_config(minimal_mixture_config());
  CHECK(config.algorithm == "smcmc");
  CHECK(config.schedule.epsilon == 0.5);
  CHECK(config.schedule.m_min == 2);
  CHECK(config.mixture_hyper.k == 2);
  CHECK(config.chains == 8);
  CHECK(config.has_synthetic);
}

TEST_CASE("validation errors name the offending key") {
  auto bad = minimal_mixture_config();
  bad["schedule"]["epsilon"] = 1.5;
  try {
    parse_config(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("epsilon") != std::string::npos);
  }

  auto unknown = minimal_mixture_config();
  unknown["schedule"]["typo_key"] = 1;
  try {
    parse_config(unknown);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("typo_key") != std::string::npos);
  }

  auto both = minimal_mixture_config();
  both["data"]["path"] = "/nonexistent.csv";
  both["data"]["format"] = "mixture";
  CHECK_THROWS_AS(parse_config(both), ConfigError);

  auto neither = minimal_mixture_config();
  neither["data"] = json::object();
  CHECK_THROWS_AS(parse_config(neither), ConfigError);
}

TEST_CASE("canonical config round-trips") {
  const RunConfig config = parse_config(minimal_mixture_config());
  const json canon = canonical_config(config);
  const RunConfig again = parse_config(canon);
  CHECK(canonical_config(again) == canon);
  CHECK(config_hash(canon) == config_hash(canonical_config(again)));
}

TEST_CASE("csv loading: mixture schema and line errors") {
  const std::string dir = temp_dir("csv");
  {
    std::ofstream out(dir + "/ok.csv");
    out << "y\n1.5\n-0.25\n";
  }
  const auto data = load_csv(dir + "/ok.csv", "mixture");
  REQUIRE(data.size() == 2);
  CHECK(data[1].values[0] == -0.25);

  {
    std::ofstream out(dir + "/bad.csv");
    out << "y\n1.5\nxyz\n";
  }
  try {
    load_csv(dir + "/bad.csv", "mixture");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  {
    std::ofstream out(dir + "/short.csv");
    out << "y\n1.5,2.5\n";
  }
  CHECK_THROWS_AS(load_csv(dir + "/short.csv", "mixture"), ConfigError);

  {
    std::ofstream out(dir + "/empty.csv");
    out << "y\n";
  }
  CHECK(load_csv(dir + "/empty.csv", "mixture").empty());
}

TEST_CASE("heart schema: strict sbp threshold") {
  const std::string dir = temp_dir("heart");
  {
    std::ofstream out(dir + "/heart.csv");
    out << "row,sbp,tobacco,obesity,age\n";
    out << "1,139,0.1,25.2,52\n";    // boundary: not hypertensive
    out << "2,140,0.2,30.1,60\n";    // strictly above: hypertensive
    out << "3,120,0.0,22.0,41\n";
  }
  const auto data = load_csv(dir + "/heart.csv", "heart");
  REQUIRE(data.size() == 3);
  CHECK(data[0].values == std::vector<double>{25.2, 52.0, 0.0});
  CHECK(data[1].values == std::vector<double>{30.1, 60.0, 1.0});
  CHECK(data[2].values.back() == 0.0);
}

TEST_CASE("gp schema enforces binary response and column names") {
  const std::string dir = temp_dir("gpcsv");
  {
    std::ofstream out(dir + "/gp.csv");
    out << "x1,x2,y\n0.5,0.25,1\n-0.5,0.75,0\n";
  }
  const auto data = load_csv(dir + "/gp.csv", "gp");
  REQUIRE(data.size() == 2);
  CHECK(data[0].values.size() == 3);

  {
    std::ofstream out(dir + "/bad_y.csv");
    out << "x1,x2,y\n0.5,0.25,0.7\n";
  }
  CHECK_THROWS_AS(load_csv(dir + "/bad_y.csv", "gp"), ConfigError);
  {
    std::ofstream out(dir + "/bad_header.csv");
    out << "a,b,y\n0.5,0.25,1\n";
  }
  CHECK_THROWS_AS(load_csv(dir + "/bad_header.csv", "gp"), ConfigError);
}

TEST_CASE("standardize_covariates centers and scales all but the response") {
  std::vector<Observation> data = {{{1.0, 10.0, 1.0}}, {{3.0, 30.0, 0.0}}, {{5.0, 20.0, 1.0}}};
  standardize_covariates(data);
  for (std::size_t c = 0; c < 2; ++c) {
    double mean = 0.0, var = 0.0;
    for (const auto& obs : data) mean += obs.values[c];
    mean /= 3.0;
    for (const auto& obs : data) var += (obs.values[c] - mean) * (obs.values[c] - mean);
    CHECK(std::abs(mean) < 1e-12);
    CHECK(var / 3.0 == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(data[0].values[2] == 1.0);  // response untouched
}

TEST_CASE("format_double writes 17 significant digits") {
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("full run emits byte-identical deterministic artifacts") {
  auto doc = minimal_mixture_config();
  const std::string dir_a = temp_dir("run_a");
  const std::string dir_b = temp_dir("run_b");
  std::ostringstream log;

  doc["output_dir"] = dir_a;
  doc["workers"] = 1;
  RunConfig config_a = parse_config(doc);
  runner::execute_run(config_a, log);

  doc["output_dir"] = dir_b;
  doc["workers"] = 1;
  RunConfig config_b = parse_config(doc);
  runner::execute_run(config_b, log);

  for (const std::string file : {"run.csv", "fhat.csv", "report.json", "summary.csv",
                                 "manifest.json"})
    CHECK(slurp(dir_a + "/" + file) == slurp(dir_b + "/" + file));

  // Worker count never changes any deterministic artifact, only timings.
  const std::string dir_c = temp_dir("run_c");
  doc["output_dir"] = dir_c;
  doc["workers"] = 8;
  runner::execute_run(parse_config(doc), log);
  for (const std::string file : {"run.csv", "fhat.csv", "report.json", "summary.csv",
                                 "manifest.json"}) {
    const std::string got = slurp(dir_c + "/" + file);
    CHECK(got == slurp(dir_a + "/" + file));
  }
}

TEST_CASE("the manifest reproduces its run byte-identically") {
  auto doc = minimal_mixture_config();
  const std::string dir_a = temp_dir("mani_a");
  doc["output_dir"] = dir_a;
  std::ostringstream log;
  runner::execute_run(parse_config(doc), log);

  // Round-trip through the emitted manifest.
  const json manifest = json::parse(slurp(dir_a + "/manifest.json"));
  RunConfig config = parse_config(manifest.at("config"));
  const std::string dir_b = temp_dir("mani_b");
  config.output_dir = dir_b;
  runner::execute_run(config, log);
  for (const std::string file : {"run.csv", "fhat.csv", "summary.csv"})
    CHECK(slurp(dir_a + "/" + file) == slurp(dir_b + "/" + file));
}

TEST_CASE("summarize aggregates rows per algorithm and batch size") {
  const std::string dir = temp_dir("summ");
  {
    std::ofstream out(dir + "/a.csv");
    out << "algorithm,batch_size,total_sweeps,mu_sorted_1,mu_sorted_2,sorted_sd\n";
    out << "smcmc,1,100,1.0,2.0,0.5\n";
  }
  {
    std::ofstream out(dir + "/b.csv");
    out << "algorithm,batch_size,total_sweeps,mu_sorted_1,mu_sorted_2,sorted_sd\n";
    out << "smcmc,1,120,2.0,3.0,0.5\n";
  }
  std::ostringstream log;
  runner::summarize({dir + "/a.csv", dir + "/b.csv"}, dir + "/table.csv", log);
  const std::string table = slurp(dir + "/table.csv");
  CHECK(table.find("smcmc,1,2,1.5,2.5,") != std::string::npos);
}
