#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oco/experiments.hpp"

using namespace oco;

namespace {

SweepSpec small_spec(unsigned jobs) {
  SweepSpec spec;
  spec.algos = {Variant::ClippedOGD, Variant::MahdaviOGD, Variant::AOGD};
  spec.horizons = {100, 200, 400};
  for (std::uint64_t s = 1; s <= 10; ++s) spec.seeds.push_back(s);
  spec.jobs = jobs;
  return spec;
}

std::string csv_of(const SweepResult& r) {
  std::ostringstream os;
  write_sweep_csv(os, r);
  return os.str();
}

std::size_t line_count(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n' ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("sweep covers every cell in order") {
  const auto p = make_problem("toy");
  std::atomic<int> observed{0};
  const auto r = run_sweep(p, small_spec(3), [&](const RunTrace&) { ++observed; });
  CHECK(r.cells.size() == 10 * 3 * 3);
  CHECK(observed == 90);
  CHECK(r.all_ok());
  CHECK(r.cells.front().algo == Variant::ClippedOGD);
  CHECK(r.cells.front().T == 100);
  CHECK(r.cells.front().seed == 1);
  CHECK(r.cells[10].T == 200);
  CHECK(r.cells.back().algo == Variant::AOGD);
  CHECK(r.cells.back().seed == 10);
  const auto csv = csv_of(r);
  CHECK(csv.rfind("algo,T,seed,regret,sum_g,sum_clip,sum_clip_sq,max_step_violation\n", 0) == 0);
  CHECK(line_count(csv) == 91);
  CHECK(r.series(Variant::ClippedOGD, [](const SweepCell& c) { return c.summary.regret; }).size() == 3);
}

TEST_CASE("sweep output does not depend on the worker count") {
  const auto p = make_problem("doubly-stochastic");
  auto spec = small_spec(1);
  spec.horizons = {50, 100};
  const auto a = run_sweep(p, spec);
  spec.jobs = 4;
  const auto b = run_sweep(p, spec);
  CHECK(csv_of(a) == csv_of(b));
}

TEST_CASE("sweep cells match single runs") {
  const auto p = make_problem("toy");
  auto spec = small_spec(2);
  const auto r = run_sweep(p, spec);
  const auto& c = r.cells[7];
  const auto trace = run(p, cell_config(spec, c.algo, c.T), c.seed);
  const auto s = summarize(trace, best_fixed_decision(p, c.seed, c.T).total);
  CHECK(c.summary.regret == s.regret);
  CHECK(c.summary.sum_clip_max == s.sum_clip_max);
}

TEST_CASE("failed cells are recorded, not thrown") {
  auto p = make_problem("toy");
  p.loss_stream = [](std::uint64_t seed, std::size_t t) {
    const double c = seed == 2 && t == 3 ? std::nan("") : 1.0;
    return ConvexFn(
        2, [](std::span<const double> x) { return x[0]; },
        [c](std::span<const double>, double w, std::span<double> out) { out[0] += w * c; });
  };
  p.mean_loss = nullptr;
  SweepSpec spec;
  spec.algos = {Variant::ClippedOGD};
  spec.horizons = {10};
  spec.seeds = {1, 2};
  const auto r = run_sweep(p, spec);
  CHECK_FALSE(r.all_ok());
  CHECK(r.cells[0].ok);
  CHECK_FALSE(r.cells[1].ok);
  std::ostringstream os;
  write_sweep_failures_csv(os, r);
  CHECK(os.str().find("clipped-ogd,10,2,") != std::string::npos);
  CHECK(line_count(csv_of(r)) == 2);
}

TEST_CASE("sweep rejects an empty grid") {
  SweepSpec spec;
  CHECK_THROWS_AS(run_sweep(make_problem("toy"), spec), std::invalid_argument);
}

TEST_CASE("sweep output files") {
  const auto dir = std::filesystem::temp_directory_path() / "oco_sweep_test";
  std::filesystem::remove_all(dir);
  auto spec = small_spec(2);
  spec.seeds = {1, 2, 3};
  write_sweep_outputs(dir, run_sweep(make_problem("toy"), spec));
  for (const char* f : {"sweep.csv", "sweep_stats.csv", "sweep_failures.csv", "fig_clipped_violation.csv",
                        "fig_violation.csv", "fig_regret.csv"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  std::ifstream in(dir / "fig_regret.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "T,clipped-ogd_mean,clipped-ogd_std,ogd_mean,ogd_std,a-ogd_mean,a-ogd_std");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("oracle cache key") {
  const auto k = oracle_cache_key("toy", 1, 100);
  CHECK(k.size() == 16);
  CHECK(k == oracle_cache_key("toy", 1, 100));
  CHECK(k != oracle_cache_key("toy", 2, 100));
  CHECK(k != oracle_cache_key("toy", 1, 101));
  CHECK(k != oracle_cache_key("toy", 1, 100, "d=5"));
}

TEST_CASE("summary JSON carries the run parameters") {
  const auto p = make_problem("toy");
  const auto trace = run(p, default_config(Variant::ClippedOGD, 50), 1);
  const auto best = best_fixed_decision(p, 1, 50);
  const auto text = summary_json(trace, summarize(trace, best.total), best);
  for (const char* key : {"\"problem\"", "\"sigma\"", "\"regret\"", "\"offline\"", "\"x_final\""}) {
    CHECK(text.find(key) != std::string::npos);
  }
  CHECK(oracle_json("toy", 1, 50, best, true).find("\"cached\": true") != std::string::npos);
}
