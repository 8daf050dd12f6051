#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <string_view>

#include "hhi/core/errors.hpp"

namespace hhi::metrics {

enum class Direction { kHigherBetter, kLowerBetter };

/// Best score among the first k beams.
inline double topk_aggregate(std::span<const double> per_beam_scores, int k, Direction direction) {
  if (k < 1 || static_cast<std::size_t>(k) > per_beam_scores.size())
    throw ValidationError("k=" + std::to_string(k) + " outside [1, " + std::to_string(per_beam_scores.size()) + "]");
  auto prefix = per_beam_scores.first(static_cast<std::size_t>(k));
  return direction == Direction::kHigherBetter ? *std::max_element(prefix.begin(), prefix.end())
                                               : *std::min_element(prefix.begin(), prefix.end());
}

inline double better_of(double a, double b, Direction direction) {
  return direction == Direction::kHigherBetter ? std::max(a, b) : std::min(a, b);
}

}  // namespace hhi::metrics
