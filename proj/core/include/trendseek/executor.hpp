#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trendseek/algebra.hpp"
#include "trendseek/engines.hpp"
#include "trendseek/ingest.hpp"
#include "trendseek/pushdown.hpp"

namespace trendseek {

struct RankedResult {
  std::string viz_id;
  double total = -1.0;
  std::vector<double> expr_scores;
  std::vector<std::size_t> breakpoints;  // indices into `series`
  std::vector<double> breakpoint_x;      // original x units
  std::vector<LineFit> fits;             // per ShapeExpr, over the solved bins
  std::vector<Point> series;             // full range, y on the scale the query was scored on
  std::vector<std::array<Point, 2>> segments;  // fitted line per ShapeExpr, in series units
};

struct ExecuteOptions {
  bool use_plan = true;  // off: extract and group every x
};

struct ExecutorStats {
  std::size_t vizs = 0;            // vizs produced by GROUP
  std::size_t eager_dropped = 0;   // vizs discarded by eager checks
  std::size_t bins_materialized = 0;
  std::optional<double> min_materialized_x;  // smallest bin x GROUP produced
  std::optional<double> max_materialized_x;
  PruneStats prune;
};

struct QueryOutput {
  std::vector<RankedResult> results;
  std::vector<std::string> warnings;
  std::map<std::string, double> timing_ms;
  ExecutorStats stats;
  bool x_is_date = false;
  ExecutionPlan plan;
};

/// EXTRACT -> GROUP -> SEGMENT -> SCORE. Viz-level failures become warnings;
/// throws Error(InfeasibleSegmentation) when every viz fails that way.
QueryOutput run_query(const Dataset& dataset, const VisualSpec& spec, const ShapeQuery& ast,
                      std::size_t k, const EngineConfig& config,
                      const ExecuteOptions& options = {});

}  // namespace trendseek
