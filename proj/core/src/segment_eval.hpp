#pragma once

#include <cstddef>

#include "trendseek/scoring.hpp"

namespace trendseek {

class CompiledQuery;

namespace detail {

/// `fit` is null when bins [first, last] cannot be fitted. `nested` must be
/// the compiled sub-query when the pattern is Nested.
double eval_segment(const ShapeSegment& seg, std::size_t self, const CompiledQuery* nested,
                    const CandidateViz& viz, std::size_t first, std::size_t last,
                    const LineFit* fit, const ScoreContext& ctx, bool gated);

}  // namespace detail
}  // namespace trendseek
