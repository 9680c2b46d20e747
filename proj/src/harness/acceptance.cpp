#include "oco/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <limits>
#include <mutex>
#include <optional>
#include <set>

#include "oco/aggregation.hpp"
#include "oco/experiments.hpp"
#include "oco/kernels.hpp"
#include "oco/rng.hpp"

namespace oco {

namespace {

const std::vector<std::size_t> kHorizons{1250, 2500, 5000, 10000, 20000};

std::vector<std::uint64_t> seeds_upto(std::uint64_t n) {
  std::vector<std::uint64_t> s;
  for (std::uint64_t i = 1; i <= n; ++i) s.push_back(i);
  return s;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

/// Ball and Cauchy-Schwarz bookkeeping over every trace the checks produce.
class TraceAudit {
 public:
  void observe(const RunTrace& trace, double radius) {
    double worst_ratio = 0.0;
    for (const auto& row : trace.rows) worst_ratio = std::max(worst_ratio, norm2(row.x) / radius);

    // (sum [g]_+)^2 <= T sum [g]_+^2 per raw constraint and for the max.
    const std::size_t m = trace.rows.empty() ? 0 : trace.rows.front().g.size();
    std::vector<double> s1(m + 1, 0.0), s2(m + 1, 0.0);
    for (const auto& row : trace.rows) {
      double gmax = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        const double c = clip_pos(row.g[i]);
        s1[i] += c;
        s2[i] += c * c;
        gmax = std::max(gmax, row.g[i]);
      }
      const double c = clip_pos(gmax);
      s1[m] += c;
      s2[m] += c * c;
    }
    const double T = static_cast<double>(trace.rows.size());
    double worst_cs = 0.0;
    std::size_t cs_fail = 0;
    for (std::size_t i = 0; i <= m; ++i) {
      const double lhs = s1[i] * s1[i];
      const double rhs = T * s2[i];
      if (lhs > rhs * (1.0 + 1e-12)) ++cs_fail;
      if (rhs > 0.0) worst_cs = std::max(worst_cs, lhs / rhs);
    }

    std::lock_guard lock(mu_);
    ++traces_;
    rows_ += trace.rows.size();
    max_ratio_ = std::max(max_ratio_, worst_ratio);
    cs_failures_ += cs_fail;
    cs_max_ratio_ = std::max(cs_max_ratio_, worst_cs);
    algos_.insert(std::string(to_string(trace.config.variant)));
    problems_.insert(trace.problem);
  }

  std::size_t traces() const { return traces_; }
  std::size_t rows() const { return rows_; }
  double max_ratio() const { return max_ratio_; }
  std::size_t cs_failures() const { return cs_failures_; }
  double cs_max_ratio() const { return cs_max_ratio_; }
  std::string coverage() const {
    std::string s = std::to_string(algos_.size()) + " algos x " + std::to_string(problems_.size()) +
                    " problems";
    return s;
  }

 private:
  std::mutex mu_;
  std::size_t traces_ = 0;
  std::size_t rows_ = 0;
  double max_ratio_ = 0.0;
  std::size_t cs_failures_ = 0;
  double cs_max_ratio_ = 0.0;
  std::set<std::string> algos_;
  std::set<std::string> problems_;
};

struct Context {
  unsigned jobs = 1;
  TraceAudit audit;
  std::map<std::string, ProblemSpec> problems;
  std::map<std::string, SweepResult> sweeps;

  const ProblemSpec& problem(const std::string& name, std::size_t d = 5) {
    const std::string key = name + "/" + std::to_string(d);
    auto it = problems.find(key);
    if (it == problems.end()) {
      ProblemOptions opts;
      opts.d = d;
      it = problems.emplace(key, make_problem(name, opts)).first;
    }
    return it->second;
  }

  RunTrace run_observed(const ProblemSpec& p, const AlgoConfig& cfg, std::uint64_t seed) {
    RunTrace trace = run(p, cfg, seed);
    audit.observe(trace, p.domain.radius());
    return trace;
  }

  const SweepResult& sweep(const std::string& key, const ProblemSpec& p, const SweepSpec& spec) {
    auto it = sweeps.find(key);
    if (it == sweeps.end()) {
      const double R = p.domain.radius();
      it = sweeps.emplace(key, run_sweep(p, spec, [this, R](const RunTrace& t) { audit.observe(t, R); }))
               .first;
    }
    return it->second;
  }

  const SweepResult& toy_sweep(double beta) {
    SweepSpec spec;
    spec.algos = {Variant::ClippedOGD, Variant::MahdaviOGD};
    spec.horizons = kHorizons;
    spec.seeds = seeds_upto(10);
    spec.beta = beta;
    spec.jobs = jobs;
    return sweep("toy/" + std::to_string(beta), problem("toy"), spec);
  }

  /// Dispatch is run on the demand series cycled ten times, with G set to the
  /// gradient bound at x* (the ball-wide bound stalls the iterates near 0).
  std::pair<const ProblemSpec*, double> dispatch_with_local_g(std::size_t T) {
    const auto& p = problem("dispatch");
    const auto bf = best_fixed_decision(p, 1, T);
    return {&p, local_gradient_bound(p, bf.result.x, 1, T)};
  }
};

constexpr std::size_t kDispatchHorizon = 28800;

struct Outcome {
  bool pass;
  std::string detail;
};

// ---- 1 ----------------------------------------------------------------------

Outcome check_lambda_identity(Context& ctx) {
  struct Case {
    const ProblemSpec* p;
    AlgoConfig cfg;
    std::uint64_t seed;
  };
  std::vector<Case> cases;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    cases.push_back({&ctx.problem("toy"), default_config(Variant::ClippedOGD, 5000), s});
  }
  for (auto agg : {Aggregation::max, Aggregation::per_constraint, Aggregation::logsumexp}) {
    auto cfg = default_config(Variant::ClippedOGD, 2000);
    cfg.aggregation = agg;
    cases.push_back({&ctx.problem("doubly-stochastic"), cfg, 1});
  }
  {
    auto cfg = default_config(Variant::StrongClippedOGD, 2000);
    cases.push_back({&ctx.problem("doubly-stochastic"), cfg, 1});
  }
  {
    const auto [p, G] = ctx.dispatch_with_local_g(kDispatchHorizon);
    auto cfg = default_config(Variant::ClippedOGD, kDispatchHorizon);
    cfg.g_override = G;
    cases.push_back({p, cfg, 1});
  }

  double worst = 0.0;
  std::size_t checked = 0;
  std::size_t active = 0;
  for (const auto& c : cases) {
    const RunTrace trace = ctx.run_observed(*c.p, c.cfg, c.seed);
    for (std::size_t k = 1; k < trace.rows.size(); ++k) {
      const auto& row = trace.rows[k];
      for (std::size_t j = 0; j < row.h.size(); ++j) {
        const double target = clip_pos(row.h[j]);
        worst = std::max(worst, std::abs(row.lambda[j] * row.theta - target));
        ++checked;
        if (target > 1e-6) ++active;
      }
    }
  }
  const bool pass = worst <= 1e-12 && active > 0;
  return {pass, "max |lambda*sigma*eta - [g]_+| = " + fmt(worst) + " (tol 1e-12) over " +
                    std::to_string(checked) + " duals, " + std::to_string(active) + " active"};
}

// ---- 2 and 10 ---------------------------------------------------------------

/// Every algorithm on every problem, so the audit covers them even when the
/// other checks are filtered out.
void audit_corpus(Context& ctx) {
  const std::size_t T = 2000;
  for (const char* name : {"toy", "doubly-stochastic", "dispatch"}) {
    const auto& p = ctx.problem(name);
    for (Variant v : {Variant::ClippedOGD, Variant::StrongClippedOGD, Variant::MahdaviOGD, Variant::AOGD}) {
      if (v == Variant::StrongClippedOGD && !p.H1) continue;
      for (auto lag : {LagrangianKind::clipped, LagrangianKind::plain}) {
        auto cfg = default_config(v, T);
        cfg.lagrangian = lag;
        ctx.run_observed(p, cfg, 7);
      }
    }
    ctx.audit.observe(
        doubling_run(p, [](std::size_t n) { return default_config(Variant::ClippedOGD, n); }, T, 7),
        p.domain.radius());
  }
}

Outcome check_ball(Context& ctx) {
  const double ratio = ctx.audit.max_ratio();
  return {ratio <= 1.0 + 1e-12, "max ||x_t||/R = " + fmt(ratio) + " (tol 1 + 1e-12) over " +
                                    std::to_string(ctx.audit.traces()) + " traces, " +
                                    std::to_string(ctx.audit.rows()) + " rows, " + ctx.audit.coverage()};
}

Outcome check_cauchy_schwarz(Context& ctx) {
  return {ctx.audit.cs_failures() == 0,
          std::to_string(ctx.audit.cs_failures()) + " violations over " +
              std::to_string(ctx.audit.traces()) + " traces; max (sum[g]_+)^2 / (T sum[g]_+^2) = " +
              fmt(ctx.audit.cs_max_ratio())};
}

// ---- 3 to 7 -----------------------------------------------------------------

std::vector<std::pair<double, double>> positive_part(std::vector<std::pair<double, double>> pts) {
  for (auto& p : pts) p.second = std::max(p.second, 0.0);
  return pts;
}

std::string slope_text(const char* what, const SlopeFit& f, double limit) {
  std::string s = std::string(what) + " slope " + fmt(f.slope) + " (<= " + fmt(limit) + ")";
  if (f.dropped > 0) s += " [" + std::to_string(f.dropped) + " pts < 1e-9 dropped]";
  return s;
}

Outcome scaling(const SweepResult& sweep, Variant algo, double clip_limit, double regret_limit,
                bool squared) {
  if (!sweep.all_ok()) return {false, "sweep had failed cells"};
  const auto clip = sweep.series(algo, [squared](const SweepCell& c) {
    return squared ? c.summary.sum_clip_sq_max : c.summary.sum_clip_max;
  });
  const auto regret = positive_part(sweep.series(algo, [](const SweepCell& c) { return c.summary.regret; }));
  const auto fc = fit_slope_floored(clip);
  const auto fr = fit_slope_floored(regret);
  const bool pass = fc.slope <= clip_limit && fr.slope <= regret_limit;
  return {pass, slope_text(squared ? "sum[g]_+^2" : "sum[g]_+", fc, clip_limit) + ", " +
                    slope_text("regret+", fr, regret_limit)};
}

Outcome check_balanced(Context& ctx) {
  return scaling(ctx.toy_sweep(0.5), Variant::ClippedOGD, 0.65, 0.65, true);
}

Outcome check_tradeoff(Context& ctx) {
  const double beta = 2.0 / 3.0;
  return scaling(ctx.toy_sweep(beta), Variant::ClippedOGD, 1.0 - beta + 0.15,
                 std::max(beta, 1.0 - beta) + 0.15, true);
}

Outcome check_strong(Context& ctx) {
  SweepSpec spec;
  spec.algos = {Variant::StrongClippedOGD};
  spec.horizons = kHorizons;
  spec.seeds = seeds_upto(5);
  spec.jobs = ctx.jobs;
  const auto& sweep = ctx.sweep("ds-strong", ctx.problem("doubly-stochastic", 5), spec);
  return scaling(sweep, Variant::StrongClippedOGD, 0.65, 0.25, false);
}

Outcome check_per_step(Context& ctx) {
  const auto& sweep = ctx.toy_sweep(0.5);
  if (!sweep.all_ok()) return {false, "sweep had failed cells"};
  // Worst seed at each horizon.
  std::vector<std::pair<double, double>> pts;
  for (std::size_t T : kHorizons) {
    double worst = 0.0;
    for (const auto& c : sweep.cells) {
      if (c.algo == Variant::ClippedOGD && c.T == T) worst = std::max(worst, c.late_violation);
    }
    pts.emplace_back(static_cast<double>(T), worst);
  }
  const auto fit = fit_slope_floored(pts);
  const double last = pts.back().second;
  return {fit.slope <= 0.0 && last <= 0.05,
          slope_text("max_{t>T/10}[g]_+", fit, 0.0) + ", value at T=20000 " + fmt(last) + " (<= 0.05)"};
}

Outcome check_contrast(Context& ctx) {
  const auto& sweep = ctx.toy_sweep(0.5);
  if (!sweep.all_ok()) return {false, "sweep had failed cells"};
  auto at_last = [&](Variant v) {
    return sweep.series(v, [](const SweepCell& c) { return c.summary.sum_clip_sq_max; }).back().second;
  };
  const double toy_clipped = at_last(Variant::ClippedOGD);
  const double toy_ogd = at_last(Variant::MahdaviOGD);

  const auto [p, G] = ctx.dispatch_with_local_g(kDispatchHorizon);
  auto viol = [&](Variant v) {
    auto cfg = default_config(v, kDispatchHorizon);
    cfg.g_override = G;
    const RunTrace trace = ctx.run_observed(*p, cfg, 1);
    return summarize(trace, 0.0).max_step_violation;
  };
  const double disp_clipped = viol(Variant::ClippedOGD);
  const double disp_ogd = viol(Variant::MahdaviOGD);
  const bool pass = toy_clipped < toy_ogd && disp_clipped <= 0.5 * disp_ogd;
  return {pass, "toy sum[g]_+^2 at T=20000: clipped " + fmt(toy_clipped) + " < ogd " + fmt(toy_ogd) +
                    "; dispatch max step violation (T=" + std::to_string(kDispatchHorizon) +
                    ", G=" + fmt(G) + "): clipped " + fmt(disp_clipped) + " <= 0.5 * ogd " +
                    fmt(disp_ogd)};
}

// ---- 8 ----------------------------------------------------------------------

Outcome check_oracles(Context& ctx) {
  const auto& toy = ctx.problem("toy");
  double toy_gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto obj = toy.mean_loss(seed, 1000);
    const auto a = offline_solve(toy, obj);
    const auto g = grid_oracle(toy, obj, 1e-3);
    toy_gap = std::max(toy_gap, std::abs(a.value - g.value));
  }
  const auto& ds = ctx.problem("doubly-stochastic", 4);
  double ds_gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto obj = ds.mean_loss(seed, 1000);
    const auto a = offline_solve(ds, obj);
    Vector ybar = obj.subgrad(Vector(ds.dim(), 0.0));
    kernels::scale(-1.0, ybar);
    const Vector x = birkhoff_projection(ybar, 4);
    ds_gap = std::max(ds_gap, std::abs(a.value - obj(x)));
  }
  return {toy_gap <= 1e-3 && ds_gap <= 1e-4, "toy |penalty - grid| = " + fmt(toy_gap) +
                                                 " (<= 1e-3); doubly-stochastic d=4 |penalty - dykstra| = " +
                                                 fmt(ds_gap) + " (<= 1e-4)"};
}

// ---- 9 ----------------------------------------------------------------------

Vector interior_point(std::mt19937_64& eng, std::size_t n, double radius) {
  Vector x(n);
  for (double& v : x) v = rng::normal(eng);
  const double r = 0.9 * radius * std::pow(rng::uniform01(eng), 1.0 / static_cast<double>(n));
  kernels::scale(r / norm2(x), x);
  return x;
}

Outcome check_gradients(Context& ctx) {
  struct Named {
    std::string where;
    ConvexFn f;
    double radius;
  };
  std::vector<Named> fns;
  for (const char* name : {"toy", "doubly-stochastic", "dispatch"}) {
    const auto& p = ctx.problem(name);
    const double R = p.domain.radius();
    for (std::size_t t = 1; t <= 3; ++t) fns.push_back({std::string(name) + " f_" + std::to_string(t), p.loss_stream(1, t), R});
    if (p.mean_loss) fns.push_back({std::string(name) + " mean loss", p.mean_loss(1, 100), R});
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
      fns.push_back({std::string(name) + " g_" + std::to_string(i + 1), p.constraints[i], R});
    }
    fns.push_back({std::string(name) + " logsumexp", logsumexp_aggregate(p.constraints), R});
  }

  std::size_t checked = 0;
  std::size_t skipped = 0;
  double worst = 0.0;
  std::string worst_where;
  for (std::size_t k = 0; k < fns.size(); ++k) {
    const auto& [where, f, R] = fns[k];
    if (!f.smooth()) {
      ++skipped;
      continue;
    }
    ++checked;
    auto eng = rng::step_engine(0x6772616475ULL, rng::kSampleStream, k);
    for (int i = 0; i < 100; ++i) {
      const Vector x = interior_point(eng, f.dim(), R);
      const double h = 1e-6 * std::max(1.0, norm2(x));
      const Vector fd = finite_diff_grad(f, x, h);
      const Vector g = f.subgrad(x);
      Vector diff = fd;
      kernels::sub(fd, g, diff);
      const double err = norm2(diff) / std::max(norm2(g), 1e-8);
      if (err > worst) {
        worst = err;
        worst_where = where;
      }
    }
  }
  return {worst <= 1e-5 && checked > 0,
          std::to_string(checked) + " smooth functions x 100 points, max rel err " + fmt(worst) + " (" +
              worst_where + "; tol 1e-5); " + std::to_string(skipped) + " nonsmooth skipped"};
}

// ---- 11 ---------------------------------------------------------------------

Outcome check_degeneration(Context& ctx) {
  ProblemSpec p = ctx.problem("toy");
  // |x|_1 <= sqrt(2) < 2 on the unit ball: never active.
  p.constraints = {l1_norm_minus(2, 2.0)};
  p.name = "toy-slack";
  const std::size_t T = 5000;
  const auto cfg = default_config(Variant::ClippedOGD, T);
  const RunTrace trace = ctx.run_observed(p, cfg, 3);

  Vector x(2, 0.0);
  std::size_t mismatches = 0;
  double max_g = -std::numeric_limits<double>::infinity();
  for (const auto& row : trace.rows) {
    if (std::memcmp(row.x.data(), x.data(), x.size() * sizeof(double)) != 0) ++mismatches;
    max_g = std::max(max_g, row.g[0]);
    x = projected_ogd_step(x, p.loss_stream(3, row.t), p.domain, trace.params.eta);
  }
  return {mismatches == 0 && max_g < 0.0,
          std::to_string(mismatches) + " of " + std::to_string(T) +
              " iterates differ bitwise from projected OGD (max g = " + fmt(max_g) + ")"};
}

using CheckFn = Outcome (*)(Context&);

struct Check {
  const char* name;
  CheckFn fn;
};

const Check kChecks[] = {
    {"lambda-identity", check_lambda_identity},
    {"ball-feasibility", check_ball},
    {"balanced-scaling", check_balanced},
    {"tradeoff-scaling", check_tradeoff},
    {"strongly-convex-scaling", check_strong},
    {"per-step-violation", check_per_step},
    {"baseline-contrast", check_contrast},
    {"oracle-crosscheck", check_oracles},
    {"gradient-check", check_gradients},
    {"cauchy-schwarz", check_cauchy_schwarz},
    {"ogd-degeneration", check_degeneration},
};

}  // namespace

const std::vector<std::string>& acceptance_check_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& c : kChecks) n.emplace_back(c.name);
    return n;
  }();
  return names;
}

std::vector<CheckResult> run_acceptance(const AcceptanceOptions& options) {
  Context ctx;
  ctx.jobs = options.jobs;
  const int count = static_cast<int>(std::size(kChecks));
  auto wanted = [&](int id) {
    return options.only.empty() || std::find(options.only.begin(), options.only.end(), id) != options.only.end();
  };
  for (int id : options.only) {
    if (id < 1 || id > count) throw std::invalid_argument("no acceptance check " + std::to_string(id));
  }

  std::vector<CheckResult> results;
  auto execute = [&](int id) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult r;
    r.id = id;
    r.name = kChecks[id - 1].name;
    try {
      const Outcome o = kChecks[id - 1].fn(ctx);
      r.pass = o.pass;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (options.on_result) options.on_result(r);
    results.push_back(std::move(r));
  };

  // The trace audits (2 and 10) run last so they see every other trace.
  constexpr int kBall = 2;
  constexpr int kCauchy = 10;
  for (int id = 1; id <= count; ++id) {
    if (id != kBall && id != kCauchy && wanted(id)) execute(id);
  }
  if (wanted(kBall) || wanted(kCauchy)) {
    audit_corpus(ctx);
    if (wanted(kBall)) execute(kBall);
    if (wanted(kCauchy)) execute(kCauchy);
  }
  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return results;
}

std::string format_check(const CheckResult& r) {
  char head[64];
  std::snprintf(head, sizeof(head), "%s %2d %-24s ", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str());
  char tail[32];
  std::snprintf(tail, sizeof(tail), "  (%.1fs)", r.seconds);
  return head + r.detail + tail;
}

}  // namespace oco
