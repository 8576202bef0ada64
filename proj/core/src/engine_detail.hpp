#pragma once

#include <span>

#include "trendseek/engines.hpp"

namespace trendseek::detail {

/// Right-nested sum s_0 + (s_1 + (... + s_{k-1})) of expr scores for the
/// breakpoints; fills `out` when given. Engines compare these sums directly.
double segmentation_sum(const CompiledQuery& query, const CandidateViz& viz,
                        std::span<const std::size_t> breakpoints, SegmentedViz* out);

void check_solvable(const CompiledQuery& query, const CandidateViz& viz);

}  // namespace trendseek::detail
