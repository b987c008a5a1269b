#include "smcmc/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "smcmc/errors.hpp"

namespace smcmc::io {

namespace {

[[noreturn]] void key_error(const std::string& path, const std::string& what) {
  throw ConfigError("config key '" + path + "': " + what);
}

class StrictObject {
 public:
  StrictObject(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) key_error(path_, "expected an object");
  }
  ~StrictObject() = default;

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }
  const json& get(const std::string& key) {
    if (!has(key)) key_error(path_ + "." + key, "missing required key");
    return node_.at(key);
  }
  const json* maybe(const std::string& key) {
    return has(key) ? &node_.at(key) : nullptr;
  }
  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (!seen_.count(it.key())) key_error(path_ + "." + it.key(), "unknown key");
  }
  const std::string& path() const { return path_; }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) key_error(path, "expected a number");
  return v.get<double>();
}

std::size_t as_count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    key_error(path, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

std::uint64_t as_seed(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    key_error(path, "expected a nonnegative integer seed");
  return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) key_error(path, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) key_error(path, "expected a boolean");
  return v.get<bool>();
}

std::vector<double> as_double_vec(const json& v, const std::string& path) {
  if (!v.is_array()) key_error(path, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(as_double(e, path));
  return out;
}

std::vector<std::size_t> as_count_vec(const json& v, const std::string& path) {
  if (!v.is_array()) key_error(path, "expected an array of counts");
  std::vector<std::size_t> out;
  for (const auto& e : v) out.push_back(as_count(e, path));
  return out;
}

void parse_schedule(const json& node, const std::string& path, ScheduleConfig& out) {
  StrictObject obj(node, path);
  if (const json* v = obj.maybe("epsilon")) out.epsilon = as_double(*v, path + ".epsilon");
  if (const json* v = obj.maybe("m_cap")) out.m_cap = as_count(*v, path + ".m_cap");
  if (const json* v = obj.maybe("m_min")) out.m_min = as_count(*v, path + ".m_min");
  if (const json* v = obj.maybe("diag_stride"))
    out.diag_stride = as_count(*v, path + ".diag_stride");
  if (const json* v = obj.maybe("batch_sizes"))
    out.batch_sizes = as_count_vec(*v, path + ".batch_sizes");
  if (out.batch_sizes.empty()) out.batch_sizes = {1};
  obj.finish();
  if (!(out.epsilon > 0.0) || !(out.epsilon < 1.0))
    key_error(path + ".epsilon", "must lie in (0, 1)");
  if (out.m_min < 1) key_error(path + ".m_min", "must be >= 1");
  if (out.m_min > out.m_cap) key_error(path + ".m_cap", "must be >= m_min");
  if (out.diag_stride < 1) key_error(path + ".diag_stride", "must be >= 1");
  if (out.batch_sizes.empty()) key_error(path + ".batch_sizes", "must not be empty");
  for (std::size_t b : out.batch_sizes)
    if (b < 1) key_error(path + ".batch_sizes", "batch sizes must be >= 1");
}

void parse_mixture(const json& node, const std::string& path, mixture::MixtureHyper& hyper,
                   mixture::InitSpec& init) {
  StrictObject obj(node, path);
  if (const json* v = obj.maybe("k")) hyper.k = as_count(*v, path + ".k");
  if (const json* v = obj.maybe("zeta")) hyper.zeta = as_double(*v, path + ".zeta");
  if (const json* v = obj.maybe("kappa")) hyper.kappa = as_double(*v, path + ".kappa");
  if (const json* v = obj.maybe("alpha")) hyper.alpha = as_double(*v, path + ".alpha");
  if (const json* v = obj.maybe("beta")) hyper.beta = as_double(*v, path + ".beta");
  if (const json* v = obj.maybe("delta")) hyper.delta = as_double(*v, path + ".delta");
  if (const json* v = obj.maybe("init_centers"))
    init.mu_centers = as_double_vec(*v, path + ".init_centers");
  if (const json* v = obj.maybe("init_jitter_sd"))
    init.mu_jitter_sd = as_double(*v, path + ".init_jitter_sd");
  obj.finish();
  if (hyper.k < 1) key_error(path + ".k", "must be >= 1");
  if (!(hyper.kappa > 0.0)) key_error(path + ".kappa", "must be positive");
  if (!(hyper.alpha > 0.0)) key_error(path + ".alpha", "must be positive");
  if (!(hyper.beta > 0.0)) key_error(path + ".beta", "must be positive");
  if (!(hyper.delta > 0.0)) key_error(path + ".delta", "must be positive");
  if (!init.mu_centers.empty() && init.mu_centers.size() != hyper.k)
    key_error(path + ".init_centers", "must have k entries");
}

void parse_gp(const json& node, const std::string& path, gp::GpConfig& out,
              PredictionGrid& grid) {
  StrictObject obj(node, path);
  if (const json* v = obj.maybe("sigma2")) out.sigma2 = as_double(*v, path + ".sigma2");
  if (const json* v = obj.maybe("grid_size")) out.grid_size = as_count(*v, path + ".grid_size");
  if (const json* v = obj.maybe("prior_shape"))
    out.prior_shape = as_double(*v, path + ".prior_shape");
  if (const json* v = obj.maybe("prior_rate")) out.prior_rate = as_double(*v, path + ".prior_rate");
  if (const json* v = obj.maybe("prior_power"))
    out.prior_power = as_double(*v, path + ".prior_power");
  if (const json* v = obj.maybe("jump_rounds"))
    out.jump_rounds = as_count(*v, path + ".jump_rounds");
  if (const json* v = obj.maybe("jitter")) out.jitter = as_double(*v, path + ".jitter");
  if (const json* v = obj.maybe("max_diag_sites"))
    out.max_diag_sites = as_count(*v, path + ".max_diag_sites");
  if (const json* v = obj.maybe("fresh_factorization"))
    out.fresh_factorization = as_bool(*v, path + ".fresh_factorization");
  if (const json* v = obj.maybe("prediction_grid")) {
    StrictObject g(*v, path + ".prediction_grid");
    grid.enabled = true;
    if (const json* x = g.maybe("min")) grid.min = as_double(*x, path + ".prediction_grid.min");
    if (const json* x = g.maybe("max")) grid.max = as_double(*x, path + ".prediction_grid.max");
    if (const json* x = g.maybe("points"))
      grid.points = as_count(*x, path + ".prediction_grid.points");
    g.finish();
    if (grid.points < 2) key_error(path + ".prediction_grid.points", "must be >= 2");
    if (!(grid.max > grid.min)) key_error(path + ".prediction_grid.max", "must exceed min");
  }
  obj.finish();
  if (!(out.sigma2 > 0.0)) key_error(path + ".sigma2", "must be positive");
  if (out.grid_size < 1) key_error(path + ".grid_size", "must be >= 1");
  if (out.jump_rounds < 1) key_error(path + ".jump_rounds", "must be >= 1");
}

void parse_smc(const json& node, const std::string& path, baselines::SmcConfig& out) {
  StrictObject obj(node, path);
  if (const json* v = obj.maybe("ess_threshold"))
    out.ess_threshold = as_double(*v, path + ".ess_threshold");
  if (const json* v = obj.maybe("move_count")) out.move_count = as_count(*v, path + ".move_count");
  if (const json* v = obj.maybe("mu_step")) out.mu_step = as_double(*v, path + ".mu_step");
  if (const json* v = obj.maybe("log_lambda_step"))
    out.log_lambda_step = as_double(*v, path + ".log_lambda_step");
  if (const json* v = obj.maybe("logit_w_step"))
    out.logit_w_step = as_double(*v, path + ".logit_w_step");
  obj.finish();
  if (!(out.ess_threshold > 0.0) || !(out.ess_threshold <= 1.0))
    key_error(path + ".ess_threshold", "must lie in (0, 1]");
  if (out.move_count < 1) key_error(path + ".move_count", "must be >= 1");
}

void parse_synthetic(const json& node, const std::string& path, SyntheticSpec& out) {
  StrictObject obj(node, path);
  out.kind = as_string(obj.get("kind"), path + ".kind");
  out.n = as_count(obj.get("n"), path + ".n");
  out.seed = as_seed(obj.get("seed"), path + ".seed");
  if (out.kind == "mixture") {
    out.mixture_truth.mu = as_double_vec(obj.get("mu"), path + ".mu");
    out.mixture_truth.lambda = as_double_vec(obj.get("lambda"), path + ".lambda");
    out.mixture_truth.w = as_double_vec(obj.get("w"), path + ".w");
  } else if (out.kind != "gp") {
    key_error(path + ".kind", "must be 'mixture' or 'gp'");
  }
  obj.finish();
  if (out.n < 1) key_error(path + ".n", "must be >= 1");
}

}  // namespace

void RunConfig::validate() const {
  if (algorithm != "smcmc" && algorithm != "mcmc" && algorithm != "smc" && algorithm != "verify")
    throw ConfigError("config key 'algorithm': must be smcmc, mcmc, smc or verify");
  if (algorithm == "verify") return;
  if (model != "mixture" && model != "gp")
    throw ConfigError("config key 'model': must be mixture or gp");
  if (chains < 2) throw ConfigError("config key 'chains': must be >= 2");
  if (workers < 1) throw ConfigError("config key 'workers': must be >= 1");
  const bool has_path = !data_path.empty();
  if (has_path == has_synthetic)
    throw ConfigError("config: exactly one of data.path and data.synthetic is required");
  if (has_path && data_format.empty())
    throw ConfigError("config key 'data.format': required with data.path");
  if (has_path && !std::filesystem::exists(data_path))
    throw ConfigError("config key 'data.path': file does not exist: " + data_path);
  if (algorithm == "smc" && model != "mixture")
    throw ConfigError("config: the smc baseline supports only the mixture model");
  if (algorithm == "mcmc" && mcmc_sweeps < 1)
    throw ConfigError("config key 'mcmc.sweeps': must be >= 1 for algorithm mcmc");
}

RunConfig parse_config(const json& doc) {
  RunConfig config;
  StrictObject obj(doc, "$");
  config.algorithm = as_string(obj.get("algorithm"), "$.algorithm");
  if (config.algorithm == "verify") {
    if (const json* v = obj.maybe("seed")) config.seed = as_seed(*v, "$.seed");
    if (const json* v = obj.maybe("instances")) config.verify_instances = as_count(*v, "$.instances");
    if (const json* v = obj.maybe("output_dir")) config.output_dir = as_string(*v, "$.output_dir");
    obj.finish();
    config.validate();
    return config;
  }
  config.model = as_string(obj.get("model"), "$.model");
  if (const json* v = obj.maybe("seed")) config.seed = as_seed(*v, "$.seed");
  if (const json* v = obj.maybe("chains")) config.chains = as_count(*v, "$.chains");
  if (const json* v = obj.maybe("workers")) config.workers = as_count(*v, "$.workers");
  if (const json* v = obj.maybe("output_dir")) config.output_dir = as_string(*v, "$.output_dir");
  if (const json* v = obj.maybe("keep_trace")) config.keep_trace = as_bool(*v, "$.keep_trace");
  if (const json* v = obj.maybe("schedule")) parse_schedule(*v, "$.schedule", config.schedule);
  if (config.schedule.batch_sizes.empty()) config.schedule.batch_sizes = {1};
  if (const json* v = obj.maybe("mixture"))
    parse_mixture(*v, "$.mixture", config.mixture_hyper, config.mixture_init);
  if (const json* v = obj.maybe("gp"))
    parse_gp(*v, "$.gp", config.gp_config, config.prediction_grid);
  if (const json* v = obj.maybe("mcmc")) {
    StrictObject m(*v, "$.mcmc");
    if (const json* s = m.maybe("sweeps")) config.mcmc_sweeps = as_count(*s, "$.mcmc.sweeps");
    m.finish();
  }
  if (const json* v = obj.maybe("smc")) parse_smc(*v, "$.smc", config.smc_config);
  {
    const json& data = obj.get("data");
    StrictObject d(data, "$.data");
    if (const json* v = d.maybe("path")) config.data_path = as_string(*v, "$.data.path");
    if (const json* v = d.maybe("format")) config.data_format = as_string(*v, "$.data.format");
    if (const json* v = d.maybe("synthetic")) {
      config.has_synthetic = true;
      parse_synthetic(*v, "$.data.synthetic", config.synthetic);
    }
    d.finish();
  }
  obj.finish();
  config.validate();
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("config parse failure in " + path + ": " + e.what());
  }
  return parse_config(doc);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json canonical_config(const RunConfig& config) {
  json doc;
  doc["algorithm"] = config.algorithm;
  if (config.algorithm == "verify") {
    doc["seed"] = config.seed;
    doc["instances"] = config.verify_instances;
    return doc;
  }
  // Execution-only parameters (output_dir, workers, keep_trace) stay out:
  // the canonical form identifies the run's results, which cannot depend
  // on them.
  doc["model"] = config.model;
  doc["seed"] = config.seed;
  doc["chains"] = config.chains;
  doc["schedule"] = {{"epsilon", config.schedule.epsilon},
                     {"m_cap", config.schedule.m_cap},
                     {"m_min", config.schedule.m_min},
                     {"diag_stride", config.schedule.diag_stride},
                     {"batch_sizes", config.schedule.batch_sizes}};
  if (config.model == "mixture") {
    doc["mixture"] = {{"k", config.mixture_hyper.k},       {"zeta", config.mixture_hyper.zeta},
                      {"kappa", config.mixture_hyper.kappa}, {"alpha", config.mixture_hyper.alpha},
                      {"beta", config.mixture_hyper.beta},   {"delta", config.mixture_hyper.delta},
                      {"init_centers", config.mixture_init.mu_centers},
                      {"init_jitter_sd", config.mixture_init.mu_jitter_sd}};
  } else {
    doc["gp"] = {{"sigma2", config.gp_config.sigma2},
                 {"grid_size", config.gp_config.grid_size},
                 {"prior_shape", config.gp_config.prior_shape},
                 {"prior_rate", config.gp_config.prior_rate},
                 {"prior_power", config.gp_config.prior_power},
                 {"jump_rounds", config.gp_config.jump_rounds},
                 {"jitter", config.gp_config.jitter},
                 {"max_diag_sites", config.gp_config.max_diag_sites},
                 {"fresh_factorization", config.gp_config.fresh_factorization}};
    if (config.prediction_grid.enabled)
      doc["gp"]["prediction_grid"] = {{"min", config.prediction_grid.min},
                                      {"max", config.prediction_grid.max},
                                      {"points", config.prediction_grid.points}};
  }
  if (config.algorithm == "mcmc") doc["mcmc"] = {{"sweeps", config.mcmc_sweeps}};
  if (config.algorithm == "smc")
    doc["smc"] = {{"ess_threshold", config.smc_config.ess_threshold},
                  {"move_count", config.smc_config.move_count},
                  {"mu_step", config.smc_config.mu_step},
                  {"log_lambda_step", config.smc_config.log_lambda_step},
                  {"logit_w_step", config.smc_config.logit_w_step}};
  if (!config.data_path.empty()) {
    doc["data"] = {{"path", config.data_path}, {"format", config.data_format}};
  } else {
    json synth = {{"kind", config.synthetic.kind},
                  {"n", config.synthetic.n},
                  {"seed", config.synthetic.seed}};
    if (config.synthetic.kind == "mixture") {
      synth["mu"] = config.synthetic.mixture_truth.mu;
      synth["lambda"] = config.synthetic.mixture_truth.lambda;
      synth["w"] = config.synthetic.mixture_truth.w;
    }
    doc["data"] = {{"synthetic", synth}};
  }
  return doc;
}

std::string config_hash(const json& canonical) {
  const std::string text = canonical.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t start = 0;
    while (start < cell.size() && cell[start] == ' ') ++start;
    cells.push_back(cell.substr(start));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

constexpr std::size_t npos_ = static_cast<std::size_t>(-1);

double parse_cell(const std::string& cell, std::size_t line_no, const std::string& column) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v))
    throw ConfigError("csv line " + std::to_string(line_no) + ": non-numeric cell in column '" +
                      column + "': '" + cell + "'");
  return v;
}

}  // namespace

std::vector<Observation> load_csv(const std::string& path, const std::string& schema) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("csv file is empty (missing header): " + path);
  const std::vector<std::string> header = split_csv_line(line);

  std::vector<Observation> out;
  std::size_t line_no = 1;

  if (schema == "mixture") {
    if (header.size() != 1 || header[0] != "y")
      throw ConfigError("csv header mismatch for schema 'mixture': expected single column y");
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto cells = split_csv_line(line);
      if (cells.size() != 1)
        throw ConfigError("csv line " + std::to_string(line_no) + ": expected 1 cell, got " +
                          std::to_string(cells.size()));
      out.push_back({{parse_cell(cells[0], line_no, "y")}});
    }
    return out;
  }

  if (schema == "gp") {
    if (header.size() < 2 || header.back() != "y")
      throw ConfigError("csv header mismatch for schema 'gp': expected x1..xd,y");
    for (std::size_t d = 0; d + 1 < header.size(); ++d)
      if (header[d] != "x" + std::to_string(d + 1))
        throw ConfigError("csv header mismatch for schema 'gp': column " + std::to_string(d + 1) +
                          " must be x" + std::to_string(d + 1));
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto cells = split_csv_line(line);
      if (cells.size() != header.size())
        throw ConfigError("csv line " + std::to_string(line_no) + ": expected " +
                          std::to_string(header.size()) + " cells, got " +
                          std::to_string(cells.size()));
      Observation obs;
      for (std::size_t c = 0; c < cells.size(); ++c)
        obs.values.push_back(parse_cell(cells[c], line_no, header[c]));
      const double y = obs.values.back();
      if (y != 0.0 && y != 1.0)
        throw ConfigError("csv line " + std::to_string(line_no) + ": y must be 0 or 1");
      out.push_back(std::move(obs));
    }
    return out;
  }

  if (schema == "heart") {
    std::size_t sbp = npos_, obesity = npos_, age = npos_;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == "sbp") sbp = c;
      if (header[c] == "obesity") obesity = c;
      if (header[c] == "age") age = c;
    }
    if (sbp == npos_ || obesity == npos_ || age == npos_)
      throw ConfigError("csv header mismatch for schema 'heart': needs sbp, obesity, age");
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto cells = split_csv_line(line);
      if (cells.size() != header.size())
        throw ConfigError("csv line " + std::to_string(line_no) + ": expected " +
                          std::to_string(header.size()) + " cells, got " +
                          std::to_string(cells.size()));
      const double sbp_v = parse_cell(cells[sbp], line_no, "sbp");
      const double ob_v = parse_cell(cells[obesity], line_no, "obesity");
      const double age_v = parse_cell(cells[age], line_no, "age");
      out.push_back({{ob_v, age_v, sbp_v > 139.0 ? 1.0 : 0.0}});
    }
    return out;
  }

  throw ConfigError("unknown csv schema: " + schema);
}

std::vector<Observation> make_synthetic(const SyntheticSpec& spec) {
  std::vector<Observation> out;
  if (spec.kind == "mixture") {
    const auto y = mixture::simulate_data(spec.mixture_truth, spec.n, spec.seed);
    out.reserve(y.size());
    for (double v : y) out.push_back({{v}});
    return out;
  }
  if (spec.kind == "gp") {
    // 2-d probit draws around a fixed smooth surface.
    RngStream rng = RngStream::split(spec.seed, 1);
    out.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
      const double x1 = rng.normal();
      const double x2 = rng.normal();
      const double f = 1.5 * std::sin(1.2 * x1) + 0.9 * x2;
      const double y = (f + rng.normal() > 0.0) ? 1.0 : 0.0;
      out.push_back({{x1, x2, y}});
    }
    return out;
  }
  throw ConfigError("unknown synthetic kind: " + spec.kind);
}

void standardize_covariates(std::vector<Observation>& data) {
  if (data.empty()) return;
  const std::size_t cols = data[0].values.size();
  if (cols < 2) return;
  for (std::size_t c = 0; c + 1 < cols; ++c) {
    double mean = 0.0;
    for (const auto& obs : data) mean += obs.values[c];
    mean /= static_cast<double>(data.size());
    double var = 0.0;
    for (const auto& obs : data) {
      const double d = obs.values[c] - mean;
      var += d * d;
    }
    var /= static_cast<double>(data.size());
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    for (auto& obs : data) obs.values[c] = (obs.values[c] - mean) / sd;
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file for writing: " + path);
  out << content;
  if (!out) throw ConfigError("write failure: " + path);
}

void emit_report(const RunReport& report, const RunConfig& config, const std::string& outdir) {
  std::filesystem::create_directories(outdir);

  // manifest.json
  const json canonical = canonical_config(config);
  json manifest;
  manifest["config"] = canonical;
  manifest["config_hash"] = config_hash(canonical);
  manifest["seed"] = config.seed;
  write_text_file(outdir + "/manifest.json", manifest.dump(2) + "\n");

  // run.csv
  std::string run_csv = "t,horizon,m,capped,degenerate";
  if (!report.steps.empty())
    for (const auto& [name, _] : report.steps.front().summaries) run_csv += "," + name;
  run_csv += "\n";
  for (const auto& step : report.steps) {
    run_csv += std::to_string(step.t) + "," + std::to_string(step.horizon) + "," +
               std::to_string(step.m) + "," + (step.capped ? "1" : "0") + "," +
               (step.degenerate ? "1" : "0");
    for (const auto& [_, value] : step.summaries) run_csv += "," + format_double(value);
    run_csv += "\n";
  }
  write_text_file(outdir + "/run.csv", run_csv);

  // fhat.csv
  std::string fhat_csv = "t,lag,value\n";
  for (const auto& step : report.steps)
    for (const auto& point : step.fhat)
      fhat_csv += std::to_string(step.t) + "," + std::to_string(point.lag) + "," +
                  (point.defined ? format_double(point.value) : std::string("nan")) + "\n";
  write_text_file(outdir + "/fhat.csv", fhat_csv);

  // timings.csv; excluded from the determinism contract.
  std::string timings = "t,wall_seconds\n";
  for (const auto& step : report.steps)
    timings += std::to_string(step.t) + "," + format_double(step.wall_seconds) + "\n";
  write_text_file(outdir + "/timings.csv", timings);

  // report.json: step records without timings.
  json steps = json::array();
  for (const auto& step : report.steps) {
    json s;
    s["t"] = step.t;
    s["horizon"] = step.horizon;
    s["m"] = step.m;
    s["capped"] = step.capped;
    s["degenerate"] = step.degenerate;
    json summaries;
    for (const auto& [name, value] : step.summaries) summaries[name] = format_double(value);
    s["summaries"] = summaries;
    steps.push_back(s);
  }
  json doc;
  doc["config_hash"] = config_hash(canonical);
  doc["total_sweeps"] = report.total_sweeps();
  doc["steps"] = steps;
  write_text_file(outdir + "/report.json", doc.dump(2) + "\n");
}

void emit_summary_row(const std::string& path, const std::string& algorithm,
                      std::size_t batch_size, const mixture::SortedMeans& summary,
                      std::size_t total_sweeps) {
  std::string csv = "algorithm,batch_size,total_sweeps";
  for (std::size_t j = 0; j < summary.sorted.size(); ++j)
    csv += ",mu_sorted_" + std::to_string(j + 1);
  csv += ",sorted_sd\n";
  csv += algorithm + "," + std::to_string(batch_size) + "," + std::to_string(total_sweeps);
  for (double v : summary.sorted) csv += "," + format_double(v);
  csv += "," + format_double(summary.sd) + "\n";
  write_text_file(path, csv);
}

void emit_prediction_grid(const std::string& path, const Ensemble& ens,
                          const gp::CholeskyCache& cache, const PredictionGrid& grid) {
  std::vector<Eigen::VectorXd> points;
  points.reserve(grid.points * grid.points);
  const double step = (grid.max - grid.min) / static_cast<double>(grid.points - 1);
  for (std::size_t i = 0; i < grid.points; ++i)
    for (std::size_t j = 0; j < grid.points; ++j) {
      Eigen::VectorXd x(2);
      x << grid.min + step * static_cast<double>(i), grid.min + step * static_cast<double>(j);
      points.push_back(x);
    }
  const std::vector<double> probs = gp::predict_many(ens, points, cache);
  std::string csv = "x1,x2,prob\n";
  for (std::size_t p = 0; p < points.size(); ++p)
    csv += format_double(points[p](0)) + "," + format_double(points[p](1)) + "," +
           format_double(probs[p]) + "\n";
  write_text_file(path, csv);
}

}  // namespace smcmc::io
