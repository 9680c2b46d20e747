#pragma once
// Trace CSV: header `t,fx,g_max,g_clip,lambda_norm,x_norm`, optionally followed
// by one `g_<i>` column per raw constraint. Reals carry 17 significant digits,
// which round-trips IEEE doubles exactly.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "oco/algorithms.hpp"

namespace oco {

inline constexpr const char* kTraceHeader = "t,fx,g_max,g_clip,lambda_norm,x_norm";

struct TraceCsvRow {
  std::size_t t = 0;
  double fx = 0.0;
  double g_max = 0.0;
  double g_clip = 0.0;
  double lambda_norm = 0.0;
  double x_norm = 0.0;
  std::vector<double> g;
};

TraceCsvRow to_csv_row(const TraceRow& row, bool per_constraint);

void write_trace_csv(std::ostream& out, const RunTrace& trace, bool per_constraint = false);
void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace,
                     bool per_constraint = false);

/// Throws std::runtime_error naming the line on a malformed file.
std::vector<TraceCsvRow> read_trace_csv(std::istream& in);
std::vector<TraceCsvRow> read_trace_csv(const std::filesystem::path& path);

/// 17 significant digits.
std::string format_real(double v);

}  // namespace oco
