#pragma once
// Sweeps over (algorithm, horizon, seed) cells and their CSV / JSON outputs.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oco/algorithms.hpp"
#include "oco/metrics.hpp"
#include "oco/oracle.hpp"
#include "oco/problems.hpp"

namespace oco {

struct SweepSpec {
  std::vector<Variant> algos;
  std::vector<std::size_t> horizons;
  std::vector<std::uint64_t> seeds;
  double beta = 0.5;
  double alpha = 0.5;
  std::optional<Aggregation> aggregation;
  std::optional<LagrangianKind> lagrangian;
  std::optional<double> g_override;
  unsigned jobs = 1;
};

struct SweepCell {
  Variant algo = Variant::ClippedOGD;
  std::size_t T = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  RunSummary summary;
  /// max_{t > T/10} max_i [g_i(x_t)]_+.
  double late_violation = 0.0;
};

struct SweepResult {
  std::string problem;
  SweepSpec spec;
  /// Ordered by (algo position in spec.algos, T, seed).
  std::vector<SweepCell> cells;

  bool all_ok() const;
  /// Mean of `field` over the successful seeds of (algo, T).
  std::vector<std::pair<double, double>> series(Variant algo,
                                                const std::function<double(const SweepCell&)>& field) const;
};

/// Config for one cell, built from the sweep spec.
AlgoConfig cell_config(const SweepSpec& spec, Variant algo, std::size_t T);

/// Runs every cell with up to spec.jobs worker threads. Offline values are
/// computed once per (seed, T) and shared across algorithms. Per-cell failures
/// are recorded in the cell rather than thrown. `observe`, when set, sees every
/// trace and must be safe to call concurrently.
SweepResult run_sweep(const ProblemSpec& problem, const SweepSpec& spec,
                      const std::function<void(const RunTrace&)>& observe = {});

/// Header: algo,T,seed,regret,sum_g,sum_clip,sum_clip_sq,max_step_violation.
/// Violation sums are for the max-aggregated constraint. Failed cells are skipped.
void write_sweep_csv(std::ostream& out, const SweepResult& result);
/// Mean and sample stdev of each sweep column per (algo, T).
void write_sweep_stats_csv(std::ostream& out, const SweepResult& result);
/// algo,T,seed,error for every failed cell.
void write_sweep_failures_csv(std::ostream& out, const SweepResult& result);
/// One CSV per metric panel: fig_clipped_violation.csv (sum [g]_+),
/// fig_violation.csv (sum g) and fig_regret.csv, each with columns
/// T,<algo>_mean,<algo>_std,...
void write_figure_series(const std::filesystem::path& dir, const SweepResult& result);
/// Writes sweep.csv, sweep_stats.csv, sweep_failures.csv and the figure series.
void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& result);

/// Summary JSON for a single run (17 significant digits).
std::string summary_json(const RunTrace& trace, const RunSummary& summary, const BestFixed& offline);

/// JSON for an oracle result.
std::string oracle_json(const std::string& problem, std::uint64_t seed, std::size_t T,
                        const BestFixed& offline, bool cached);

/// Stable key for the oracle cache: hex FNV-1a of "problem|seed|T|extra".
std::string oracle_cache_key(const std::string& problem, std::uint64_t seed, std::size_t T,
                             const std::string& extra = "");

}  // namespace oco
