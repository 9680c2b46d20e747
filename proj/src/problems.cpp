#include "oco/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "oco/kernels.hpp"
#include "oco/rng.hpp"

namespace oco {

std::vector<ConvexFn> losses(const ProblemSpec& problem, std::uint64_t seed, std::size_t T) {
  std::vector<ConvexFn> out;
  out.reserve(T);
  for (std::size_t t = 1; t <= T; ++t) out.push_back(problem.loss_stream(seed, t));
  return out;
}

namespace {

std::string fmt17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// a^T x + offset restricted to the listed coordinates.
ConvexFn sparse_affine(std::size_t dim, std::vector<std::size_t> idx, double coeff, double offset,
                       std::string name) {
  auto ids = std::make_shared<const std::vector<std::size_t>>(std::move(idx));
  const double lip = std::abs(coeff) * std::sqrt(static_cast<double>(ids->size()));
  return ConvexFn(
      dim,
      [ids, coeff, offset](std::span<const double> x) {
        double acc = 0.0;
        for (std::size_t i : *ids) acc += x[i];
        return coeff * acc + offset;
      },
      [ids, coeff](std::span<const double>, double w, std::span<double> out) {
        const double s = w * coeff;
        for (std::size_t i : *ids) out[i] += s;
      },
      FnTraits{std::move(name), true, lip});
}

}  // namespace

// ---- toy -----------------------------------------------------------------

std::array<double, 2> toy_raw_cost(std::uint64_t seed, std::size_t t) {
  auto eng = rng::step_engine(seed, rng::kLossStream, t);
  const double c1 = rng::uniform(eng, 0.0, 1.2);
  const double c2 = rng::uniform(eng, 0.0, 1.0);
  return {c1, c2};
}

std::array<double, 2> toy_cost(std::uint64_t seed, std::size_t t) {
  auto c = toy_raw_cost(seed, t);
  double nrm = std::hypot(c[0], c[1]);
  if (nrm == 0.0) return {1.0, 0.0};  // measure-zero draw; keep the unit-norm contract
  return {c[0] / nrm, c[1] / nrm};
}

ProblemSpec toy_problem() {
  ProblemSpec p{
      .name = "toy",
      .constraints = {l1_norm_minus(2, 1.0, "l1_ball")},
      .domain = BallDomain(1.0, 2),
      .G = std::sqrt(2.0),
      .H1 = std::nullopt,
      .loss_stream = {},
      .mean_loss = {},
      .strictly_feasible = {0.0, 0.0},
      .metadata = {},
  };
  p.loss_stream = [](std::uint64_t seed, std::size_t t) {
    auto c = toy_cost(seed, t);
    return linear_fn({c[0], c[1]}, 0.0, "toy_loss");
  };
  p.mean_loss = [](std::uint64_t seed, std::size_t T) {
    double s0 = 0.0;
    double s1 = 0.0;
    for (std::size_t t = 1; t <= T; ++t) {
      auto c = toy_cost(seed, t);
      s0 += c[0];
      s1 += c[1];
    }
    const double inv = 1.0 / static_cast<double>(T);
    return linear_fn({s0 * inv, s1 * inv}, 0.0, "toy_mean_loss");
  };
  p.metadata["R"] = "1";
  p.metadata["G"] = "sqrt(2): max(|c_t|=1, |sign(x)| <= sqrt(2))";
  return p;
}

// ---- doubly stochastic ---------------------------------------------------

Vector random_permutation_matrix(std::size_t d, std::uint64_t seed, std::size_t t) {
  auto eng = rng::step_engine(seed, rng::kLossStream, t);
  std::vector<std::size_t> perm(d);
  for (std::size_t i = 0; i < d; ++i) perm[i] = i;
  for (std::size_t i = d - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng::below(eng, i + 1)]);
  }
  Vector y(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) y[i * d + perm[i]] = 1.0;
  return y;
}

ProblemSpec doubly_stochastic_problem(std::size_t d) {
  if (d < 2) throw std::invalid_argument("doubly_stochastic_problem: d must be >= 2");
  const std::size_t n = d * d;
  const double rd = static_cast<double>(d);

  std::vector<ConvexFn> gs;
  gs.reserve(4 * d + n);
  auto row = [d](std::size_t i) {
    std::vector<std::size_t> idx(d);
    for (std::size_t j = 0; j < d; ++j) idx[j] = i * d + j;
    return idx;
  };
  auto col = [d](std::size_t j) {
    std::vector<std::size_t> idx(d);
    for (std::size_t i = 0; i < d; ++i) idx[i] = i * d + j;
    return idx;
  };
  for (std::size_t i = 0; i < d; ++i) {
    gs.push_back(sparse_affine(n, row(i), 1.0, -1.0, "row_le_" + std::to_string(i)));
  }
  for (std::size_t i = 0; i < d; ++i) {
    gs.push_back(sparse_affine(n, row(i), -1.0, 1.0, "row_ge_" + std::to_string(i)));
  }
  for (std::size_t j = 0; j < d; ++j) {
    gs.push_back(sparse_affine(n, col(j), 1.0, -1.0, "col_le_" + std::to_string(j)));
  }
  for (std::size_t j = 0; j < d; ++j) {
    gs.push_back(sparse_affine(n, col(j), -1.0, 1.0, "col_ge_" + std::to_string(j)));
  }
  for (std::size_t k = 0; k < n; ++k) {
    gs.push_back(sparse_affine(n, {k}, -1.0, 0.0, "nonneg_" + std::to_string(k)));
  }

  // ||X||_F <= sqrt(d) for doubly stochastic X; the ball is padded to d.
  const double R = rd;
  ProblemSpec p{
      .name = "doubly-stochastic",
      .constraints = std::move(gs),
      .domain = BallDomain(R, n),
      // ||X - Y_t|| <= R + sqrt(d); row/column sums have gradient norm sqrt(d).
      .G = R + std::sqrt(rd),
      .H1 = 1.0,
      .loss_stream = {},
      .mean_loss = {},
      .strictly_feasible = Vector(n, 1.0 / rd),
      .metadata = {},
  };
  p.loss_stream = [d](std::uint64_t seed, std::size_t t) {
    return half_squared_distance(random_permutation_matrix(d, seed, t), "frobenius_loss");
  };
  p.mean_loss = [d, n](std::uint64_t seed, std::size_t T) {
    Vector ybar(n, 0.0);
    for (std::size_t t = 1; t <= T; ++t) {
      kernels::axpy(1.0, random_permutation_matrix(d, seed, t), ybar);
    }
    kernels::scale(1.0 / static_cast<double>(T), ybar);
    // (1/T) sum 0.5||Y_t - X||^2 = 0.5||X - Ybar||^2 + d/2 - 0.5||Ybar||^2
    const double offset = 0.5 * static_cast<double>(d) - 0.5 * kernels::squared_norm(ybar);
    auto c = std::make_shared<const Vector>(std::move(ybar));
    return ConvexFn(
        n,
        [c, offset](std::span<const double> x) {
          double acc = 0.0;
          for (std::size_t i = 0; i < x.size(); ++i) {
            const double v = x[i] - (*c)[i];
            acc += v * v;
          }
          return 0.5 * acc + offset;
        },
        [c](std::span<const double> x, double w, std::span<double> out) {
          kernels::axpy(w, x, out);
          kernels::axpy(-w, *c, out);
        },
        FnTraits{"frobenius_mean_loss", true, std::nullopt});
  };
  p.metadata["d"] = std::to_string(d);
  p.metadata["R"] = fmt17(R) + " (doubly stochastic ||X||_F <= sqrt(d), padded to d)";
  p.metadata["G"] = fmt17(p.G) + " = R + sqrt(d)";
  p.metadata["H1"] = "1";
  return p;
}

// ---- economic dispatch ---------------------------------------------------

namespace {

struct DispatchLossData {
  std::array<double, 3> a;
  std::array<double, 3> b;
  double xi;
};

ConvexFn dispatch_loss(const std::shared_ptr<const DispatchLossData>& p, double demand) {
  return ConvexFn(
      3,
      [p, demand](std::span<const double> x) {
        double cost = 0.0;
        double total = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
          cost += 0.5 * p->a[i] * x[i] * x[i] + p->b[i] * x[i];
          total += x[i];
        }
        const double gap = total - demand;
        return cost + p->xi * gap * gap;
      },
      [p, demand](std::span<const double> x, double w, std::span<double> out) {
        const double balance = 2.0 * p->xi * (x[0] + x[1] + x[2] - demand);
        for (std::size_t i = 0; i < 3; ++i) out[i] += w * (p->a[i] * x[i] + p->b[i] + balance);
      },
      FnTraits{"dispatch_loss", true, std::nullopt});
}

}  // namespace

ProblemSpec dispatch_problem(const DispatchParams& params) {
  if (params.demand.empty()) throw std::invalid_argument("dispatch_problem: demand series is empty");
  for (double v : params.demand) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("dispatch_problem: demand must be positive and finite");
    }
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (params.a[i] < 0 || params.b[i] < 0 || params.d[i] < 0 || params.e[i] < 0 ||
        params.x_max[i] <= 0) {
      throw std::invalid_argument("dispatch_problem: coefficients must be nonnegative");
    }
  }
  const double cap_norm = std::sqrt(params.x_max[0] * params.x_max[0] +
                                    params.x_max[1] * params.x_max[1] +
                                    params.x_max[2] * params.x_max[2]);
  const double R = 1.1 * cap_norm;

  std::vector<ConvexFn> gs;
  {
    const auto dq = params.d;
    const auto el = params.e;
    const double cap = params.e_max;
    gs.emplace_back(
        3,
        [dq, el, cap](std::span<const double> x) {
          double acc = 0.0;
          for (std::size_t i = 0; i < 3; ++i) acc += dq[i] * x[i] * x[i] + el[i] * x[i];
          return acc - cap;
        },
        [dq, el](std::span<const double> x, double w, std::span<double> out) {
          for (std::size_t i = 0; i < 3; ++i) out[i] += w * (2.0 * dq[i] * x[i] + el[i]);
        },
        FnTraits{"emission", true, std::nullopt});
  }
  for (std::size_t i = 0; i < 3; ++i) {
    gs.push_back(sparse_affine(3, {i}, -1.0, 0.0, "x" + std::to_string(i + 1) + "_ge_0"));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    gs.push_back(
        sparse_affine(3, {i}, 1.0, -params.x_max[i], "x" + std::to_string(i + 1) + "_le_max"));
  }

  // Lipschitz bounds over the ball |x| <= R.
  const double d_peak = *std::max_element(params.demand.begin(), params.demand.end());
  const double a_max = std::max({params.a[0], params.a[1], params.a[2]});
  const double dq_max = std::max({params.d[0], params.d[1], params.d[2]});
  const double b_norm = std::hypot(params.b[0], params.b[1], params.b[2]);
  const double e_norm = std::hypot(params.e[0], params.e[1], params.e[2]);
  const double sqrt3 = std::sqrt(3.0);
  const double lip_f = a_max * R + b_norm + 2.0 * params.xi * sqrt3 * (sqrt3 * R + d_peak);
  const double lip_emission = 2.0 * dq_max * R + e_norm;
  const double G = std::max({lip_f, lip_emission, 1.0});

  auto loss_data =
      std::make_shared<const DispatchLossData>(DispatchLossData{params.a, params.b, params.xi});
  auto demand = std::make_shared<const std::vector<double>>(params.demand);

  // Interior point: a tenth of each capacity keeps every box and the emission
  // cap strictly satisfied for the default coefficients.
  Vector interior{0.1 * params.x_max[0], 0.1 * params.x_max[1], 0.1 * params.x_max[2]};

  ProblemSpec p{
      .name = "dispatch",
      .constraints = std::move(gs),
      .domain = BallDomain(R, 3),
      .G = G,
      .H1 = std::min({params.a[0], params.a[1], params.a[2]}),
      .loss_stream = {},
      .mean_loss = {},
      .strictly_feasible = interior,
      .metadata = {},
  };
  p.loss_stream = [loss_data, demand](std::uint64_t, std::size_t t) {
    return dispatch_loss(loss_data, (*demand)[(t - 1) % demand->size()]);
  };
  p.mean_loss = [loss_data, demand](std::uint64_t, std::size_t T) {
    // xi (s - d_t)^2 averages to xi (s^2 - 2 s dbar) + xi mean(d^2).
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t t = 1; t <= T; ++t) {
      const double v = (*demand)[(t - 1) % demand->size()];
      s1 += v;
      s2 += v * v;
    }
    const double dbar = s1 / static_cast<double>(T);
    const double d2bar = s2 / static_cast<double>(T);
    const double xi = loss_data->xi;
    return ConvexFn(
        3,
        [loss_data, dbar, d2bar, xi](std::span<const double> x) {
          double cost = 0.0;
          double total = 0.0;
          for (std::size_t i = 0; i < 3; ++i) {
            cost += 0.5 * loss_data->a[i] * x[i] * x[i] + loss_data->b[i] * x[i];
            total += x[i];
          }
          return cost + xi * (total * total - 2.0 * total * dbar + d2bar);
        },
        [loss_data, dbar, xi](std::span<const double> x, double w, std::span<double> out) {
          const double balance = 2.0 * xi * (x[0] + x[1] + x[2] - dbar);
          for (std::size_t i = 0; i < 3; ++i) {
            out[i] += w * (loss_data->a[i] * x[i] + loss_data->b[i] + balance);
          }
        },
        FnTraits{"dispatch_mean_loss", true, std::nullopt});
  };
  p.metadata["R"] = fmt17(R) + " = 1.1 * ||x_max||";
  p.metadata["G"] = fmt17(G) + " = max(L_f, L_emission, 1) over the ball";
  p.metadata["H1"] = fmt17(*p.H1) + " = min_i a_i";
  p.metadata["demand_scale"] = fmt17(params.demand_scale);
  p.metadata["demand_steps"] = std::to_string(params.demand.size());
  return p;
}

std::vector<double> load_demand_csv(const std::filesystem::path& path, double scale) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_demand_csv: cannot open " + path.string());
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
      s.remove_suffix(1);
    }
    return s;
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = trim(line);
    if (lineno == 1 && view.size() >= 3 && static_cast<unsigned char>(view[0]) == 0xEF) {
      view.remove_prefix(3);  // UTF-8 BOM
    }
    if (view.empty()) continue;
    const auto comma = view.find(',');
    if (comma == std::string_view::npos) {
      throw std::runtime_error("load_demand_csv: line " + std::to_string(lineno) +
                               ": expected two comma-separated columns");
    }
    std::string_view field = trim(view.substr(comma + 1));
    if (const auto extra = field.find(','); extra != std::string_view::npos) {
      field = trim(field.substr(0, extra));
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    const bool ok = ec == std::errc() && ptr == field.data() + field.size() && std::isfinite(value);
    if (!ok) {
      if (lineno == 1) continue;  // header
      throw std::runtime_error("load_demand_csv: line " + std::to_string(lineno) +
                               ": demand '" + std::string(field) + "' is not a number");
    }
    out.push_back(value * scale);
  }
  if (out.empty()) throw std::runtime_error("load_demand_csv: no demand rows in " + path.string());
  return out;
}

std::vector<double> synthetic_demand(std::size_t steps, std::uint64_t seed) {
  constexpr double kSlotsPerDay = 288.0;
  std::vector<double> out(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    auto eng = rng::step_engine(seed, rng::kDemandStream, k);
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(k) / kSlotsPerDay;
    // Trough around 04:00, peak late afternoon.
    const double diurnal = -std::cos(phase - 2.0 * std::numbers::pi * 4.0 / 24.0);
    out[k] = 14000.0 + 2800.0 * diurnal + 150.0 * rng::normal(eng);
  }
  return out;
}

void write_demand_csv(const std::filesystem::path& path, const std::vector<double>& demand) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_demand_csv: cannot open " + path.string());
  out << "t,demand\n" << std::setprecision(17);
  for (std::size_t k = 0; k < demand.size(); ++k) out << (k + 1) << ',' << demand[k] << '\n';
}

ProblemSpec make_problem(const std::string& name, const ProblemOptions& options) {
  if (name == "toy") return toy_problem();
  if (name == "doubly-stochastic") return doubly_stochastic_problem(options.d);
  if (name == "dispatch") {
    DispatchParams params;
    params.demand_scale = options.demand_scale;
    if (options.demand_csv) {
      params.demand = load_demand_csv(*options.demand_csv, options.demand_scale);
    } else {
      params.demand = synthetic_demand(options.synthetic_steps, options.demand_seed);
      for (double& v : params.demand) v *= options.demand_scale;
    }
    auto p = dispatch_problem(params);
    p.metadata["demand_source"] =
        options.demand_csv ? options.demand_csv->string() : std::string("synthetic");
    return p;
  }
  throw std::invalid_argument("unknown problem '" + name + "'");
}

}  // namespace oco
