#include "oco/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "oco/trace_io.hpp"

namespace oco {

namespace {

using json = nlohmann::json;

template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

json summary_fields(const RunSummary& s) {
  return json{{"T", s.T},
              {"loss_sum", s.loss_sum},
              {"regret", s.regret},
              {"sum_g", s.sum_g},
              {"sum_clip", s.sum_clip},
              {"sum_clip_sq", s.sum_clip_sq},
              {"sum_g_max", s.sum_g_max},
              {"sum_clip_max", s.sum_clip_max},
              {"sum_clip_sq_max", s.sum_clip_sq_max},
              {"max_step_violation", s.max_step_violation}};
}

json result_fields(const OracleResult& r) {
  return json{{"x", r.x},           {"value", r.value},   {"residual", r.residual},
              {"method", r.method}, {"iterations", r.iterations}};
}

struct Column {
  const char* name;
  double (*get)(const SweepCell&);
};

constexpr Column kColumns[] = {
    {"regret", [](const SweepCell& c) { return c.summary.regret; }},
    {"sum_g", [](const SweepCell& c) { return c.summary.sum_g_max; }},
    {"sum_clip", [](const SweepCell& c) { return c.summary.sum_clip_max; }},
    {"sum_clip_sq", [](const SweepCell& c) { return c.summary.sum_clip_sq_max; }},
    {"max_step_violation", [](const SweepCell& c) { return c.summary.max_step_violation; }},
};

/// Values of `get` over the successful cells of (algo, T), in seed order.
std::vector<double> group(const SweepResult& r, Variant algo, std::size_t T,
                          double (*get)(const SweepCell&)) {
  std::vector<double> v;
  for (const auto& c : r.cells) {
    if (c.ok && c.algo == algo && c.T == T) v.push_back(get(c));
  }
  return v;
}

}  // namespace

bool SweepResult::all_ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const SweepCell& c) { return c.ok; });
}

std::vector<std::pair<double, double>> SweepResult::series(
    Variant algo, const std::function<double(const SweepCell&)>& field) const {
  std::vector<std::pair<double, double>> out;
  for (std::size_t T : spec.horizons) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& c : cells) {
      if (c.ok && c.algo == algo && c.T == T) {
        sum += field(c);
        ++n;
      }
    }
    if (n > 0) out.emplace_back(static_cast<double>(T), sum / static_cast<double>(n));
  }
  return out;
}

AlgoConfig cell_config(const SweepSpec& spec, Variant algo, std::size_t T) {
  AlgoConfig cfg = default_config(algo, T, spec.beta);
  cfg.alpha = spec.alpha;
  if (spec.aggregation) cfg.aggregation = *spec.aggregation;
  if (spec.lagrangian) cfg.lagrangian = *spec.lagrangian;
  cfg.g_override = spec.g_override;
  return cfg;
}

SweepResult run_sweep(const ProblemSpec& problem, const SweepSpec& spec,
                      const std::function<void(const RunTrace&)>& observe) {
  if (spec.algos.empty() || spec.horizons.empty() || spec.seeds.empty()) {
    throw std::invalid_argument("sweep: algos, horizons and seeds must be nonempty");
  }
  SweepResult result;
  result.problem = problem.name;
  result.spec = spec;

  // Offline values shared by every algorithm at (seed, T).
  struct OfflineCell {
    std::size_t T;
    std::uint64_t seed;
    std::optional<double> total;
    std::string error;
  };
  std::vector<OfflineCell> offline;
  for (std::size_t T : spec.horizons) {
    for (std::uint64_t seed : spec.seeds) offline.push_back({T, seed, std::nullopt, {}});
  }
  parallel_for(offline.size(), spec.jobs, [&](std::size_t i) {
    auto& o = offline[i];
    try {
      o.total = best_fixed_decision(problem, o.seed, o.T).total;
    } catch (const std::exception& e) {
      o.error = std::string("oracle: ") + e.what();
    }
  });
  auto offline_of = [&](std::size_t T, std::uint64_t seed) -> const OfflineCell& {
    for (const auto& o : offline) {
      if (o.T == T && o.seed == seed) return o;
    }
    throw std::logic_error("sweep: missing offline cell");
  };

  for (Variant algo : spec.algos) {
    for (std::size_t T : spec.horizons) {
      for (std::uint64_t seed : spec.seeds) {
        SweepCell c;
        c.algo = algo;
        c.T = T;
        c.seed = seed;
        result.cells.push_back(std::move(c));
      }
    }
  }
  parallel_for(result.cells.size(), spec.jobs, [&](std::size_t i) {
    auto& c = result.cells[i];
    const auto& o = offline_of(c.T, c.seed);
    if (!o.total) {
      c.error = o.error;
      return;
    }
    try {
      const RunTrace trace = run(problem, cell_config(spec, c.algo, c.T), c.seed);
      c.summary = summarize(trace, *o.total);
      c.late_violation = max_step_violation_after(trace, c.T / 10);
      if (observe) observe(trace);
      c.ok = true;
    } catch (const std::exception& e) {
      c.error = e.what();
    }
  });
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "algo,T,seed";
  for (const auto& col : kColumns) out << ',' << col.name;
  out << '\n';
  for (const auto& c : result.cells) {
    if (!c.ok) continue;
    out << to_string(c.algo) << ',' << c.T << ',' << c.seed;
    for (const auto& col : kColumns) out << ',' << format_real(col.get(c));
    out << '\n';
  }
}

void write_sweep_stats_csv(std::ostream& out, const SweepResult& result) {
  out << "algo,T,n";
  for (const auto& col : kColumns) out << ',' << col.name << "_mean," << col.name << "_std";
  out << '\n';
  for (Variant algo : result.spec.algos) {
    for (std::size_t T : result.spec.horizons) {
      const auto n = group(result, algo, T, kColumns[0].get).size();
      if (n == 0) continue;
      out << to_string(algo) << ',' << T << ',' << n;
      for (const auto& col : kColumns) {
        const auto v = group(result, algo, T, col.get);
        const auto ms = mean_std(v);
        out << ',' << format_real(ms.mean) << ',' << format_real(ms.stdev);
      }
      out << '\n';
    }
  }
}

void write_sweep_failures_csv(std::ostream& out, const SweepResult& result) {
  out << "algo,T,seed,error\n";
  for (const auto& c : result.cells) {
    if (c.ok) continue;
    std::string msg = c.error;
    std::replace(msg.begin(), msg.end(), '"', '\'');
    out << to_string(c.algo) << ',' << c.T << ',' << c.seed << ",\"" << msg << "\"\n";
  }
}

void write_figure_series(const std::filesystem::path& dir, const SweepResult& result) {
  const std::pair<const char*, double (*)(const SweepCell&)> panels[] = {
      {"fig_clipped_violation.csv", kColumns[2].get},
      {"fig_violation.csv", kColumns[1].get},
      {"fig_regret.csv", kColumns[0].get},
  };
  for (const auto& [file, get] : panels) {
    auto out = open_out(dir / file);
    out << 'T';
    for (Variant a : result.spec.algos) out << ',' << to_string(a) << "_mean," << to_string(a) << "_std";
    out << '\n';
    for (std::size_t T : result.spec.horizons) {
      out << T;
      for (Variant a : result.spec.algos) {
        const auto v = group(result, a, T, get);
        if (v.empty()) {
          out << ",,";
          continue;
        }
        const auto ms = mean_std(v);
        out << ',' << format_real(ms.mean) << ',' << format_real(ms.stdev);
      }
      out << '\n';
    }
  }
}

void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& result) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "sweep.csv");
    write_sweep_csv(out, result);
  }
  {
    auto out = open_out(dir / "sweep_stats.csv");
    write_sweep_stats_csv(out, result);
  }
  {
    auto out = open_out(dir / "sweep_failures.csv");
    write_sweep_failures_csv(out, result);
  }
  write_figure_series(dir, result);
}

std::string summary_json(const RunTrace& trace, const RunSummary& summary, const BestFixed& offline) {
  const auto& cfg = trace.config;
  const auto& p = trace.params;
  json j;
  j["problem"] = trace.problem;
  j["algo"] = std::string(to_string(cfg.variant));
  j["seed"] = trace.seed;
  j["T"] = cfg.horizon;
  j["beta"] = cfg.beta;
  j["alpha"] = cfg.alpha;
  j["lagrangian"] = std::string(to_string(cfg.lagrangian));
  j["aggregation"] = std::string(to_string(cfg.aggregation));
  j["params"] = json{{"sigma", p.sigma}, {"eta", p.eta},   {"G", p.G},
                     {"H1", p.H1},       {"m", p.m},       {"aogd_eta0", p.aogd_eta0},
                     {"aogd_theta0", p.aogd_theta0}};
  j["summary"] = summary_fields(summary);
  j["offline"] = result_fields(offline.result);
  j["offline"]["total"] = offline.total;
  if (!trace.rows.empty()) j["x_final"] = trace.rows.back().x;
  return j.dump(2);
}

std::string oracle_json(const std::string& problem, std::uint64_t seed, std::size_t T,
                        const BestFixed& offline, bool cached) {
  json j = result_fields(offline.result);
  j["problem"] = problem;
  j["seed"] = seed;
  j["T"] = T;
  j["total"] = offline.total;
  j["cached"] = cached;
  return j.dump(2);
}

std::string oracle_cache_key(const std::string& problem, std::uint64_t seed, std::size_t T,
                             const std::string& extra) {
  const std::string text = problem + "|" + std::to_string(seed) + "|" + std::to_string(T) + "|" + extra;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace oco
