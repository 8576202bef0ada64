#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "trendseek/algebra.hpp"
#include "trendseek/ingest.hpp"

namespace trendseek {

/// Early fit-and-test on an anchored Up/Down ShapeExpr. A viz whose bins in
/// [x_start, x_end] score negatively against `pattern` can be dropped.
struct EagerCheck {
  std::size_t expr = 0;
  Pattern pattern;
  double x_start = 0.0;
  double x_end = 0.0;
};

struct ExecutionPlan {
  /// x-domain the query covers: leading expr's x.s to trailing expr's x.e.
  std::optional<double> domain_lo;
  std::optional<double> domain_hi;
  /// EXTRACT keeps records inside these ranges widened by one bin; GROUP only
  /// materializes the matching bins. Empty means no restriction.
  std::vector<XRange> ranges;
  std::vector<EagerCheck> eager_checks;

  bool restricts() const noexcept { return !ranges.empty(); }
};

/// `ast` must be valid.
ExecutionPlan pushdown_plan(const ShapeQuery& ast, const VisualSpec& spec);

/// Bins of `viz` whose x lies in [lo, hi] widened by half a bin width.
std::optional<std::pair<std::size_t, std::size_t>> bins_within(const CandidateViz& viz,
                                                               std::optional<double> lo,
                                                               std::optional<double> hi);

/// Score of the check on `viz`, or nullopt when fewer than two bins fall in
/// its range.
std::optional<double> eager_score(const EagerCheck& check, const CandidateViz& viz);

}  // namespace trendseek
