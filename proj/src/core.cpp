#include "oco/core.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "oco/kernels.hpp"

namespace oco {

BallDomain::BallDomain(double radius, std::size_t dimension)
    : radius_(radius), dimension_(dimension) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("BallDomain: radius must be positive and finite");
  }
  if (dimension == 0) throw std::invalid_argument("BallDomain: dimension must be >= 1");
}

bool BallDomain::contains(std::span<const double> x, double rel_slack) const {
  return x.size() == dimension_ && norm2(x) <= radius_ * (1.0 + rel_slack);
}

ConvexFn::ConvexFn(std::size_t dim, EvalFn eval, AccumulateFn accumulate, FnTraits traits)
    : dim_(dim),
      eval_(std::make_shared<const EvalFn>(std::move(eval))),
      accumulate_(std::make_shared<const AccumulateFn>(std::move(accumulate))),
      traits_(std::make_shared<const FnTraits>(std::move(traits))) {
  if (dim == 0) throw std::invalid_argument("ConvexFn: dimension must be >= 1");
}

Vector ConvexFn::subgrad(std::span<const double> x) const {
  Vector out(dim_, 0.0);
  accumulate_subgrad(x, 1.0, out);
  return out;
}

ConvexFn linear_fn(Vector c, double offset, std::string name) {
  const std::size_t n = c.size();
  const double lip = norm2(c);
  auto coeffs = std::make_shared<const Vector>(std::move(c));
  return ConvexFn(
      n, [coeffs, offset](std::span<const double> x) { return kernels::dot(*coeffs, x) + offset; },
      [coeffs](std::span<const double>, double w, std::span<double> out) {
        kernels::axpy(w, *coeffs, out);
      },
      FnTraits{std::move(name), true, lip});
}

ConvexFn half_squared_distance(Vector center, std::string name) {
  const std::size_t n = center.size();
  auto c = std::make_shared<const Vector>(std::move(center));
  return ConvexFn(
      n,
      [c](std::span<const double> x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double d = x[i] - (*c)[i];
          acc += d * d;
        }
        return 0.5 * acc;
      },
      [c](std::span<const double> x, double w, std::span<double> out) {
        kernels::axpy(w, x, out);
        kernels::axpy(-w, *c, out);
      },
      FnTraits{std::move(name), true, std::nullopt});
}

ConvexFn l1_norm_minus(std::size_t dim, double bound, std::string name) {
  return ConvexFn(
      dim,
      [bound](std::span<const double> x) {
        double acc = 0.0;
        for (double v : x) acc += std::abs(v);
        return acc - bound;
      },
      [](std::span<const double> x, double w, std::span<double> out) {
        for (std::size_t i = 0; i < x.size(); ++i) {
          if (x[i] > 0.0) {
            out[i] += w;
          } else if (x[i] < 0.0) {
            out[i] -= w;
          }
        }
      },
      FnTraits{std::move(name), false, std::sqrt(static_cast<double>(dim))});
}

double norm2(std::span<const double> x) { return std::sqrt(kernels::squared_norm(x)); }

bool all_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void project_ball_inplace(std::span<double> x, const BallDomain& dom) {
  if (x.size() != dom.dimension()) throw std::invalid_argument("project_ball: dimension mismatch");
  if (!all_finite(x)) throw std::invalid_argument("project_ball: non-finite input");
  const double nrm = norm2(x);
  if (nrm > dom.radius()) kernels::scale(dom.radius() / nrm, x);
}

Vector project_ball(std::span<const double> x, const BallDomain& dom) {
  Vector out(x.begin(), x.end());
  project_ball_inplace(out, dom);
  return out;
}

double clip_pos(double v) { return v > 0.0 ? v : 0.0; }

Vector clipped_subgrad(const ConvexFn& g, std::span<const double> x) {
  Vector out(x.size(), 0.0);
  if (g(x) > 0.0) g.accumulate_subgrad(x, 1.0, out);
  return out;
}

Vector lagrangian_grad_x(const ConvexFn& f, std::span<const ConvexFn> gs,
                         std::span<const double> x, std::span<const double> lambda) {
  if (lambda.size() != gs.size()) {
    throw std::invalid_argument("lagrangian_grad_x: multiplier count != constraint count");
  }
  for (double l : lambda) {
    if (!(l >= 0.0) || !std::isfinite(l)) {
      throw std::invalid_argument("lagrangian_grad_x: multipliers must be finite and >= 0");
    }
  }
  Vector out(x.size(), 0.0);
  f.accumulate_subgrad(x, 1.0, out);
  for (std::size_t i = 0; i < gs.size(); ++i) {
    if (lambda[i] > 0.0 && gs[i](x) > 0.0) gs[i].accumulate_subgrad(x, lambda[i], out);
  }
  return out;
}

Vector finite_diff_grad(const ConvexFn& f, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: h must be positive");
  Vector probe(x.begin(), x.end());
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = probe[i];
    probe[i] = xi + h;
    const double fp = f(probe);
    probe[i] = xi - h;
    const double fm = f(probe);
    probe[i] = xi;
    out[i] = (fp - fm) / (2.0 * h);
  }
  return out;
}

}  // namespace oco
