#pragma once
// Collapsing m constraints into a single one.

#include <span>
#include <string_view>

#include "oco/core.hpp"

namespace oco {

enum class AggregateMode { max, logsumexp };

std::string_view to_string(AggregateMode mode);

/// x -> max_i g_i(x); subgradient taken from the lowest-index argmax.
/// Throws std::invalid_argument when `gs` is empty.
ConvexFn max_aggregate(std::span<const ConvexFn> gs);

/// x -> log sum_i exp g_i(x), evaluated with the max-shift. The subgradient is
/// the softmax-weighted combination of the member subgradients.
/// Throws std::invalid_argument when `gs` is empty.
ConvexFn logsumexp_aggregate(std::span<const ConvexFn> gs);

ConvexFn aggregate(std::span<const ConvexFn> gs, AggregateMode mode);

}  // namespace oco
