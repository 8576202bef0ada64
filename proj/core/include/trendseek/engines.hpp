#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trendseek/compiled.hpp"
#include "trendseek/ingest.hpp"
#include "trendseek/stats.hpp"

namespace trendseek {

enum class EngineKind { Exhaustive, Dp, SegTree, SegTreePrune, Greedy, Dtw };

EngineKind parse_engine(std::string_view name);
std::string_view to_string(EngineKind kind) noexcept;

struct EngineConfig {
  EngineKind engine = EngineKind::SegTreePrune;
  std::size_t prune_sample = 32;
  std::size_t prune_points = 16;
  std::size_t prune_round_levels = 2;
  bool eager_pushdown = false;
  double quantifier_threshold = 0.0;
  std::uint64_t seed = 0;
  std::size_t threads = 0;            // 0 = hardware concurrency
  std::size_t bound_chain_nodes = 32;  // exact chain bounds once a level is this small
};

struct SegmentedViz {
  std::vector<std::size_t> breakpoints;  // b_0 = 0 < ... < b_k = B-1
  std::vector<double> expr_scores;
  double total = -1.0;
  std::vector<LineFit> fits;
};

/// Scores a fixed breakpoint vector. Every engine reports its answer through
/// this function, so totals agree bit for bit across engines.
SegmentedViz evaluate_segmentation(const CompiledQuery& query, const CandidateViz& viz,
                                   std::span<const std::size_t> breakpoints);

inline constexpr std::size_t kExhaustiveMaxBins = 64;
inline constexpr std::size_t kExhaustiveMaxExprs = 4;

/// Throws Error(TooLarge) beyond 64 bins or 4 ShapeExprs.
SegmentedViz enumerate_exhaustive(const CompiledQuery& query, const CandidateViz& viz);

/// S(j, i): best sum of scores of ShapeExprs j..k-1 when expr j starts at bin i.
struct DpTable {
  std::size_t k = 0;
  std::size_t bins = 0;
  std::vector<double> best;         // k * bins, -inf when unreachable
  std::vector<std::size_t> choice;  // end bin of expr j chosen for S(j, i)

  double at(std::size_t j, std::size_t i) const { return best[j * bins + i]; }
  std::size_t end_of(std::size_t j, std::size_t i) const { return choice[j * bins + i]; }
};

DpTable dp_table(const CompiledQuery& query, const CandidateViz& viz);
SegmentedViz solve_dp(const CompiledQuery& query, const CandidateViz& viz);
SegmentedViz solve_segment_tree(const CompiledQuery& query, const CandidateViz& viz);
SegmentedViz solve_greedy(const CompiledQuery& query, const CandidateViz& viz);

SegmentedViz enumerate_exhaustive(const ShapeQuery& ast, const CandidateViz& viz);
SegmentedViz solve_dp(const ShapeQuery& ast, const CandidateViz& viz);
SegmentedViz solve_segment_tree(const ShapeQuery& ast, const CandidateViz& viz);
SegmentedViz solve_greedy(const ShapeQuery& ast, const CandidateViz& viz);

/// Equal-length split that honours pinned breakpoints. Throws
/// Error(InfeasibleSegmentation) when no split exists.
std::vector<std::size_t> equal_breakpoints(const CompiledQuery& query, const CandidateViz& viz);

/// Template series for the DTW baseline: one straight piece per ShapeExpr with
/// the expr's characteristic slope, z-normalized.
std::vector<double> dtw_template(const CompiledQuery& query, std::size_t length);
double dtw_template_distance(const CompiledQuery& query, const CandidateViz& viz);

class SegmentTreeSolver {
 public:
  /// Throws Error(InfeasibleSegmentation) and Error(TooLarge) (more than 16
  /// ShapeExprs).
  SegmentTreeSolver(const CompiledQuery& query, const CandidateViz& viz);
  ~SegmentTreeSolver();
  SegmentTreeSolver(SegmentTreeSolver&&) noexcept;
  SegmentTreeSolver& operator=(SegmentTreeSolver&&) noexcept;

  /// Height of the current level; 0 is the leaf level.
  std::size_t level() const noexcept;
  std::size_t node_count() const noexcept;
  bool done() const noexcept;
  void advance(std::size_t levels = 1);

  /// Sound interval for the total finish() will return.
  ScoreBounds bounds(std::size_t chain_node_limit = 32) const;

  /// Runs to the root and re-scores the winning breakpoints.
  SegmentedViz finish();

  std::size_t merges() const noexcept;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

ScoreBounds level_bounds(const CompiledQuery& query, const CandidateViz& viz, std::size_t level,
                         std::size_t chain_node_limit = 32);

struct RankedViz {
  std::size_t index = 0;  // position in the input span
  std::string id;
  SegmentedViz result;
};

/// Total descending, then id ascending.
bool ranks_before(const RankedViz& a, const RankedViz& b) noexcept;

struct PruneStats {
  std::size_t vizs = 0;
  std::size_t reached_root = 0;
  std::size_t pruned = 0;
  double initial_lower_bound = 0.0;
};

struct EngineRun {
  std::vector<RankedViz> top;
  std::vector<std::string> warnings;
  std::size_t infeasible = 0;  // vizs skipped with InfeasibleSegmentation
  PruneStats prune;
};

/// Two-stage collective pruning over the segment tree.
EngineRun prune_run(const CompiledQuery& query, std::span<const CandidateViz> vizs, std::size_t k,
                    const EngineConfig& config);

/// Solves every viz with config.engine and keeps the top k. Vizs that fail
/// with a data error are skipped with a warning; Error(TooLarge) propagates.
EngineRun rank_vizs(const CompiledQuery& query, std::span<const CandidateViz> vizs, std::size_t k,
                    const EngineConfig& config);

SegmentedViz solve_one(const CompiledQuery& query, const CandidateViz& viz, EngineKind engine);

}  // namespace trendseek
