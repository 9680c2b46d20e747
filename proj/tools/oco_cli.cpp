// oco: run, sweep, oracle and validate for online convex optimization with
// long-term constraints.
//
// Options may also come from a flat key=value file given with --config FILE;
// keys are long flag names without the dashes, and flags on the command line
// take precedence. OCO_OUT_DIR sets the default output directory.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oco/acceptance.hpp"
#include "oco/algorithms.hpp"
#include "oco/experiments.hpp"
#include "oco/kernels.hpp"
#include "oco/metrics.hpp"
#include "oco/oracle.hpp"
#include "oco/problems.hpp"
#include "oco/trace_io.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string default_out_dir() {
  const char* env = std::getenv("OCO_OUT_DIR");
  return env && *env ? env : "out";
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// key=value lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

/// argv with config-file entries spliced in right after the subcommand name
/// (for keys not already given as flags).
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!config) return args;
  std::vector<std::string> injected;
  for (const auto& [key, value] : read_config(*config)) {
    if (!given_on_command_line(args, key)) injected.push_back("--" + key + "=" + value);
  }
  std::size_t at = args.size();
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "run" || args[i] == "sweep" || args[i] == "oracle" || args[i] == "validate" ||
        args[i] == "demand") {
      at = i + 1;
      break;
    }
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), injected.begin(), injected.end());
  return args;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct ProblemArgs {
  std::string problem = "toy";
  std::size_t d = 5;
  std::string demand_csv;
  double demand_scale = oco::kDefaultDemandScale;

  void add(CLI::App* app) {
    app->add_option("--problem", problem, "toy | doubly-stochastic | dispatch")
        ->check(CLI::IsMember({"toy", "doubly-stochastic", "dispatch"}));
    app->add_option("--d", d, "matrix size for doubly-stochastic")->check(CLI::Range(2, 64));
    app->add_option("--demand-csv", demand_csv, "demand series for dispatch (index,demand)");
    app->add_option("--demand-scale", demand_scale, "factor applied to raw demand");
  }

  oco::ProblemOptions options() const {
    oco::ProblemOptions o;
    o.d = d;
    if (!demand_csv.empty()) o.demand_csv = demand_csv;
    o.demand_scale = demand_scale;
    return o;
  }

  std::string cache_extra() const {
    std::ostringstream os;
    os << "d=" << d << ";csv=" << demand_csv << ";scale=" << oco::format_real(demand_scale);
    return os.str();
  }
};

/// "--G" accepts a number or "local" (the gradient bound at x*).
std::optional<double> resolve_g(const std::string& g, const oco::ProblemSpec& problem, std::uint64_t seed,
                                std::size_t T) {
  if (g.empty()) return std::nullopt;
  if (g == "local") {
    const auto bf = oco::best_fixed_decision(problem, seed, T);
    return oco::local_gradient_bound(problem, bf.result.x, seed, T);
  }
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(g, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != g.size() || !(v > 0.0)) throw UsageError("--G must be a positive number or 'local'");
  return v;
}

// ---- run ----

struct RunArgs {
  ProblemArgs problem;
  std::string algo = "clipped-ogd";
  std::size_t T = 0;
  double beta = 0.5;
  double alpha = 0.5;
  std::uint64_t seed = 1;
  std::string out;
  std::string lagrangian;
  std::string aggregation;
  std::optional<double> eta;
  std::optional<double> sigma;
  std::optional<double> h1;
  std::string g;
  bool doubling = false;
  bool per_constraint = false;
};

int cmd_run(const RunArgs& a) {
  const auto problem = oco::make_problem(a.problem.problem, a.problem.options());
  const auto variant = oco::parse_variant(a.algo);
  const auto T = a.T;

  auto configure = [&](std::size_t horizon) {
    auto cfg = oco::default_config(variant, horizon, a.beta);
    cfg.alpha = a.alpha;
    if (!a.lagrangian.empty()) cfg.lagrangian = oco::parse_lagrangian(a.lagrangian);
    if (!a.aggregation.empty()) cfg.aggregation = oco::parse_aggregation(a.aggregation);
    cfg.eta_override = a.eta;
    cfg.sigma_override = a.sigma;
    cfg.h1_override = a.h1;
    return cfg;
  };
  const auto g = resolve_g(a.g, problem, a.seed, T);
  auto cfg = configure(T);
  cfg.g_override = g;
  cfg.validate();

  const oco::RunTrace trace = a.doubling
                                  ? oco::doubling_run(problem,
                                                      [&](std::size_t n) {
                                                        auto c = configure(n);
                                                        c.g_override = g;
                                                        return c;
                                                      },
                                                      T, a.seed)
                                  : oco::run(problem, cfg, a.seed);
  const auto offline = oco::best_fixed_decision(problem, a.seed, T);
  const auto summary = oco::summarize(trace, offline.total);

  const fs::path dir = a.out.empty() ? default_out_dir() : a.out;
  fs::create_directories(dir);
  oco::write_trace_csv(dir / "trace.csv", trace, a.per_constraint);
  const std::string json = oco::summary_json(trace, summary, offline);
  {
    std::ofstream js(dir / "summary.json");
    if (!js) throw std::runtime_error("cannot write " + (dir / "summary.json").string());
    js << json << '\n';
  }
  std::cout << json << '\n';
  return 0;
}

// ---- sweep ----

struct SweepArgs {
  ProblemArgs problem;
  std::string algos = "ogd,a-ogd,clipped-ogd";
  std::string horizons = "1250,2500,5000,10000,20000";
  std::size_t seeds = 10;
  std::uint64_t first_seed = 1;
  double beta = 0.5;
  double alpha = 0.5;
  std::string aggregation;
  std::string lagrangian;
  std::string g;
  unsigned jobs = 1;
  std::string out;
};

int cmd_sweep(const SweepArgs& a) {
  const auto problem = oco::make_problem(a.problem.problem, a.problem.options());
  oco::SweepSpec spec;
  for (const auto& s : split_list(a.algos)) spec.algos.push_back(oco::parse_variant(s));
  for (const auto& s : split_list(a.horizons)) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || v == 0) throw UsageError("bad horizon '" + s + "'");
    spec.horizons.push_back(static_cast<std::size_t>(v));
  }
  if (a.seeds == 0) throw UsageError("--seeds must be >= 1");
  for (std::size_t i = 0; i < a.seeds; ++i) spec.seeds.push_back(a.first_seed + i);
  spec.beta = a.beta;
  spec.alpha = a.alpha;
  if (!a.aggregation.empty()) spec.aggregation = oco::parse_aggregation(a.aggregation);
  if (!a.lagrangian.empty()) spec.lagrangian = oco::parse_lagrangian(a.lagrangian);
  if (!a.g.empty()) {
    std::size_t largest = 0;
    for (auto T : spec.horizons) largest = std::max(largest, T);
    spec.g_override = resolve_g(a.g, problem, spec.seeds.front(), largest);
  }
  spec.jobs = a.jobs;

  const auto result = oco::run_sweep(problem, spec);
  const fs::path dir = a.out.empty() ? default_out_dir() : a.out;
  oco::write_sweep_outputs(dir, result);

  std::size_t failed = 0;
  for (const auto& c : result.cells) failed += c.ok ? 0 : 1;
  std::cout << "sweep: " << result.cells.size() << " cells, " << failed << " failed -> "
            << (dir / "sweep.csv").string() << '\n';
  for (const auto& c : result.cells) {
    if (!c.ok) {
      std::cerr << "failed " << oco::to_string(c.algo) << " T=" << c.T << " seed=" << c.seed << ": "
                << c.error << '\n';
    }
  }
  return failed == 0 ? 0 : kExitFailure;
}

// ---- oracle ----

struct OracleArgs {
  ProblemArgs problem;
  std::uint64_t seed = 1;
  std::size_t T = 0;
  std::string out;
  std::string cache_dir;
};

int cmd_oracle(const OracleArgs& a) {
  const fs::path out_dir = a.out.empty() ? default_out_dir() : a.out;
  const fs::path cache = a.cache_dir.empty() ? out_dir / "oracle_cache" : fs::path(a.cache_dir);
  const std::string key = oco::oracle_cache_key(a.problem.problem, a.seed, a.T, a.problem.cache_extra());
  const fs::path cached = cache / (key + ".json");
  fs::create_directories(out_dir);

  if (fs::exists(cached)) {
    std::ifstream in(cached);
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (!j.is_discarded()) {
      j["cached"] = true;
      const std::string json = j.dump(2);
      std::ofstream(out_dir / "oracle.json") << json << '\n';
      std::cout << "cached " << cached.string() << '\n' << json << '\n';
      return 0;
    }
    std::cerr << "ignoring unreadable cache entry " << cached.string() << '\n';
  }
  const auto problem = oco::make_problem(a.problem.problem, a.problem.options());
  const auto offline = oco::best_fixed_decision(problem, a.seed, a.T);
  fs::create_directories(cache);
  const std::string json = oco::oracle_json(problem.name, a.seed, a.T, offline, false);
  for (const fs::path& p : {cached, out_dir / "oracle.json"}) {
    std::ofstream js(p);
    if (!js) throw std::runtime_error("cannot write " + p.string());
    js << json << '\n';
  }
  std::cout << "computed " << cached.string() << '\n' << json << '\n';
  return 0;
}

// ---- validate ----

struct ValidateArgs {
  unsigned jobs = 1;
  std::vector<int> only;
};

int cmd_validate(const ValidateArgs& a) {
  oco::AcceptanceOptions opts;
  opts.jobs = a.jobs;
  opts.only = a.only;
  opts.on_result = [](const oco::CheckResult& r) { std::cerr << "  done " << r.id << ' ' << r.name << '\n'; };
  const auto results = oco::run_acceptance(opts);
  std::size_t passed = 0;
  for (const auto& r : results) {
    std::cout << oco::format_check(r) << '\n';
    passed += r.pass ? 1 : 0;
  }
  std::cout << passed << '/' << results.size() << " checks passed\n";
  return passed == results.size() ? 0 : kExitFailure;
}

// ---- demand fixture ----

struct DemandArgs {
  std::size_t steps = 2880;
  std::uint64_t seed = 2018;
  std::string out = "demand_synthetic.csv";
};

int cmd_demand(const DemandArgs& a) {
  oco::write_demand_csv(a.out, oco::synthetic_demand(a.steps, a.seed));
  std::cout << "wrote " << a.steps << " rows to " << a.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App app{"Online convex optimization with long-term constraints"};
  app.require_subcommand(1);
  std::string kernels = "auto";
  app.add_option("--kernels", kernels, "vector kernels: auto | scalar | avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
  app.add_option("--config", "flat key=value file with defaults for the subcommand's flags");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "one run: writes trace.csv and summary.json");
  run.problem.add(run_cmd);
  run_cmd->add_option("--algo", run.algo, "clipped-ogd | strong | ogd | a-ogd");
  run_cmd->add_option("--T", run.T, "horizon")->required()->check(CLI::PositiveNumber);
  run_cmd->add_option("--beta", run.beta, "stepsize exponent in (0,1)");
  run_cmd->add_option("--alpha", run.alpha, "sigma parameter in (0,1)");
  run_cmd->add_option("--seed", run.seed, "loss stream seed");
  run_cmd->add_option("--out", run.out, "output directory (default $OCO_OUT_DIR or out)");
  run_cmd->add_option("--lagrangian", run.lagrangian, "clipped | plain");
  run_cmd->add_option("--aggregation", run.aggregation, "max | logsumexp | per-constraint");
  run_cmd->add_option("--eta", run.eta, "override the stepsize");
  run_cmd->add_option("--sigma", run.sigma, "override sigma");
  run_cmd->add_option("--H1", run.h1, "override the strong convexity modulus");
  run_cmd->add_option("--G", run.g, "override the gradient bound (number or 'local')");
  run_cmd->add_flag("--doubling", run.doubling, "horizon-free doubling schedule");
  run_cmd->add_flag("--per-constraint", run.per_constraint, "add g_i columns to trace.csv");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "grid over algorithms, horizons and seeds");
  sweep.problem.add(sweep_cmd);
  sweep_cmd->add_option("--algos", sweep.algos, "comma-separated algorithms");
  sweep_cmd->add_option("--T", sweep.horizons, "comma-separated horizons");
  sweep_cmd->add_option("--seeds", sweep.seeds, "number of seeds");
  sweep_cmd->add_option("--first-seed", sweep.first_seed, "first seed");
  sweep_cmd->add_option("--beta", sweep.beta, "stepsize exponent in (0,1)");
  sweep_cmd->add_option("--alpha", sweep.alpha, "sigma parameter in (0,1)");
  sweep_cmd->add_option("--aggregation", sweep.aggregation, "max | logsumexp | per-constraint");
  sweep_cmd->add_option("--lagrangian", sweep.lagrangian, "clipped | plain (all algorithms)");
  sweep_cmd->add_option("--G", sweep.g, "override the gradient bound (number or 'local')");
  sweep_cmd->add_option("--jobs", sweep.jobs, "worker threads")->check(CLI::Range(1u, 256u));
  sweep_cmd->add_option("--out", sweep.out, "output directory (default $OCO_OUT_DIR or out)");

  OracleArgs oracle;
  auto* oracle_cmd = app.add_subcommand("oracle", "best fixed decision in hindsight (cached)");
  oracle.problem.add(oracle_cmd);
  oracle_cmd->add_option("--seed", oracle.seed, "loss stream seed");
  oracle_cmd->add_option("--T", oracle.T, "horizon")->required()->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--out", oracle.out, "output directory (default $OCO_OUT_DIR or out)");
  oracle_cmd->add_option("--cache-dir", oracle.cache_dir, "cache directory (default <out>/oracle_cache)");

  ValidateArgs validate;
  auto* validate_cmd = app.add_subcommand("validate", "run the acceptance checks");
  validate_cmd->add_option("--jobs", validate.jobs, "worker threads for sweeps")->check(CLI::Range(1u, 256u));
  validate_cmd->add_option("--only", validate.only, "check ids to run")->delimiter(',');

  DemandArgs demand;
  auto* demand_cmd = app.add_subcommand("demand", "write a synthetic five-minute demand series");
  demand_cmd->add_option("--steps", demand.steps, "rows")->check(CLI::PositiveNumber);
  demand_cmd->add_option("--seed", demand.seed, "noise seed");
  demand_cmd->add_option("--out", demand.out, "CSV path");

  try {
    std::vector<const char*> cargs;
    for (const auto& s : args) cargs.push_back(s.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (kernels != "auto") {
      const auto isa = kernels == "avx2" ? oco::kernels::Isa::avx2 : oco::kernels::Isa::scalar;
      if (!oco::kernels::isa_available(isa)) throw UsageError("kernels '" + kernels + "' not available on this CPU");
      oco::kernels::set_isa(isa);
    }
    if (run_cmd->parsed()) return cmd_run(run);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep);
    if (oracle_cmd->parsed()) return cmd_oracle(oracle);
    if (validate_cmd->parsed()) return cmd_validate(validate);
    if (demand_cmd->parsed()) return cmd_demand(demand);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const oco::RunError& e) {
    std::cerr << "run failed at step " << e.step() << ": " << e.detail() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
