#include "oco/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

namespace oco {

namespace {

using FnList = std::shared_ptr<const std::vector<ConvexFn>>;

FnList copy_list(std::span<const ConvexFn> gs, const char* who) {
  if (gs.empty()) throw std::invalid_argument(std::string(who) + ": need at least one constraint");
  for (const auto& g : gs) {
    if (g.dim() != gs.front().dim()) {
      throw std::invalid_argument(std::string(who) + ": constraint dimensions differ");
    }
  }
  return std::make_shared<const std::vector<ConvexFn>>(gs.begin(), gs.end());
}

bool all_smooth(const std::vector<ConvexFn>& gs) {
  for (const auto& g : gs) {
    if (!g.smooth()) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(AggregateMode mode) {
  return mode == AggregateMode::max ? "max" : "logsumexp";
}

ConvexFn max_aggregate(std::span<const ConvexFn> gs) {
  FnList list = copy_list(gs, "max_aggregate");
  if (list->size() == 1) return list->front();
  auto argmax = [list](std::span<const double> x, double* value) {
    std::size_t best = 0;
    double best_v = (*list)[0](x);
    for (std::size_t i = 1; i < list->size(); ++i) {
      const double v = (*list)[i](x);
      if (v > best_v) {
        best_v = v;
        best = i;
      }
    }
    if (value != nullptr) *value = best_v;
    return best;
  };
  return ConvexFn(
      list->front().dim(),
      [argmax](std::span<const double> x) {
        double v = 0.0;
        argmax(x, &v);
        return v;
      },
      [list, argmax](std::span<const double> x, double w, std::span<double> out) {
        (*list)[argmax(x, nullptr)].accumulate_subgrad(x, w, out);
      },
      FnTraits{"max", false, std::nullopt});
}

ConvexFn logsumexp_aggregate(std::span<const ConvexFn> gs) {
  FnList list = copy_list(gs, "logsumexp_aggregate");
  return ConvexFn(
      list->front().dim(),
      [list](std::span<const double> x) {
        std::vector<double> v(list->size());
        double top = -INFINITY;
        for (std::size_t i = 0; i < v.size(); ++i) {
          v[i] = (*list)[i](x);
          top = std::max(top, v[i]);
        }
        double acc = 0.0;
        for (double vi : v) acc += std::exp(vi - top);
        return top + std::log(acc);
      },
      [list](std::span<const double> x, double w, std::span<double> out) {
        std::vector<double> v(list->size());
        double top = -INFINITY;
        for (std::size_t i = 0; i < v.size(); ++i) {
          v[i] = (*list)[i](x);
          top = std::max(top, v[i]);
        }
        double total = 0.0;
        for (double& vi : v) {
          vi = std::exp(vi - top);
          total += vi;
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
          (*list)[i].accumulate_subgrad(x, w * v[i] / total, out);
        }
      },
      FnTraits{"logsumexp", all_smooth(*list), std::nullopt});
}

ConvexFn aggregate(std::span<const ConvexFn> gs, AggregateMode mode) {
  return mode == AggregateMode::max ? max_aggregate(gs) : logsumexp_aggregate(gs);
}

}  // namespace oco
