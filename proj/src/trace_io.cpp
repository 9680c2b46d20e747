#include "oco/trace_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oco {

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("format_real: conversion failed");
  return std::string(buf, ptr);
}

TraceCsvRow to_csv_row(const TraceRow& row, bool per_constraint) {
  TraceCsvRow r;
  r.t = row.t;
  r.fx = row.fx;
  r.g_max = row.g.empty() ? 0.0 : *std::max_element(row.g.begin(), row.g.end());
  r.g_clip = clip_pos(r.g_max);
  double l2 = 0.0;
  for (double l : row.lambda) l2 += l * l;
  r.lambda_norm = std::sqrt(l2);
  double x2 = 0.0;
  for (double v : row.x) x2 += v * v;
  r.x_norm = std::sqrt(x2);
  if (per_constraint) r.g = row.g;
  return r;
}

void write_trace_csv(std::ostream& out, const RunTrace& trace, bool per_constraint) {
  out << kTraceHeader;
  const std::size_t m = trace.rows.empty() ? 0 : trace.rows.front().g.size();
  if (per_constraint) {
    for (std::size_t i = 1; i <= m; ++i) out << ",g_" << i;
  }
  out << '\n';
  for (const auto& row : trace.rows) {
    const auto r = to_csv_row(row, per_constraint);
    out << r.t << ',' << format_real(r.fx) << ',' << format_real(r.g_max) << ','
        << format_real(r.g_clip) << ',' << format_real(r.lambda_norm) << ','
        << format_real(r.x_norm);
    for (double v : r.g) out << ',' << format_real(v);
    out << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace, bool per_constraint) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_trace_csv(out, trace, per_constraint);
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_real(std::string_view s, std::size_t lineno) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("trace csv line " + std::to_string(lineno) + ": bad number '" +
                             std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<TraceCsvRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::string base(kTraceHeader);
  if (line.compare(0, base.size(), base) != 0) {
    throw std::runtime_error("trace csv line 1: unexpected header");
  }
  const std::size_t columns = split(line).size();
  std::vector<TraceCsvRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != columns) {
      throw std::runtime_error("trace csv line " + std::to_string(lineno) + ": expected " +
                               std::to_string(columns) + " fields");
    }
    TraceCsvRow r;
    std::size_t t = 0;
    const auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), t);
    if (ec != std::errc() || ptr != f[0].data() + f[0].size()) {
      throw std::runtime_error("trace csv line " + std::to_string(lineno) + ": bad step index");
    }
    r.t = t;
    r.fx = parse_real(f[1], lineno);
    r.g_max = parse_real(f[2], lineno);
    r.g_clip = parse_real(f[3], lineno);
    r.lambda_norm = parse_real(f[4], lineno);
    r.x_norm = parse_real(f[5], lineno);
    for (std::size_t i = 6; i < f.size(); ++i) r.g.push_back(parse_real(f[i], lineno));
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<TraceCsvRow> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_trace_csv(in);
}

}  // namespace oco
