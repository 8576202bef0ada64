#include "trendseek/pushdown.hpp"

#include <algorithm>
#include <limits>

#include "trendseek/compiled.hpp"
#include "trendseek/scoring.hpp"
#include "trendseek/stats.hpp"

namespace trendseek {

ExecutionPlan pushdown_plan(const ShapeQuery& ast, const VisualSpec&) {
  ExecutionPlan plan;
  const CompiledQuery query(ast);
  const std::size_t k = query.k();
  if (query.has_sketch()) {
    const auto& sketch = query.segment(0).pattern.sketch;
    if (!sketch.empty()) {
      plan.domain_lo = sketch.front().x;
      plan.domain_hi = sketch.back().x;
    }
  } else {
    plan.domain_lo = query.expr_x_start(0);
    plan.domain_hi = query.expr_x_end(k - 1);
  }
  if (plan.domain_lo || plan.domain_hi) {
    plan.ranges.push_back({plan.domain_lo.value_or(-std::numeric_limits<double>::infinity()),
                           plan.domain_hi.value_or(std::numeric_limits<double>::infinity())});
  }

  const ShapeQuery normalized = normalize_ast(ast);
  const auto exprs = shape_exprs(normalized);
  for (std::size_t j = 0; j < exprs.size(); ++j) {
    if (!exprs[j]->is_segment()) continue;
    const ShapeSegment& s = exprs[j]->segment;
    const auto kind = s.pattern.kind;
    if (kind != PatternKind::Up && kind != PatternKind::Down) continue;
    if (!s.location.x_start || !s.location.x_end || !s.modifier.empty()) continue;
    plan.eager_checks.push_back({j, s.pattern, *s.location.x_start, *s.location.x_end});
  }
  return plan;
}

std::optional<std::pair<std::size_t, std::size_t>> bins_within(const CandidateViz& viz,
                                                               std::optional<double> lo,
                                                               std::optional<double> hi) {
  const double half = viz.bin_width / 2.0;
  std::optional<std::size_t> first;
  std::size_t last = 0;
  for (std::size_t i = 0; i < viz.size(); ++i) {
    const double x = viz.bins[i].x;
    if (lo && x < *lo - half) continue;
    if (hi && x > *hi + half) break;
    if (!first) first = i;
    last = i;
  }
  if (!first) return std::nullopt;
  return std::pair{*first, last};
}

std::optional<double> eager_score(const EagerCheck& check, const CandidateViz& viz) {
  const auto range = bins_within(viz, check.x_start, check.x_end);
  if (!range || range->second == range->first) return std::nullopt;
  SummarizedStats stats;
  for (std::size_t i = range->first; i <= range->second; ++i) stats += viz.bins[i].stats;
  const auto fit = try_fit_line(stats);
  if (!fit) return std::nullopt;
  return score_pattern(check.pattern, *fit);
}

}  // namespace trendseek
