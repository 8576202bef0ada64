#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "trendseek/algebra.hpp"
#include "trendseek/ingest.hpp"
#include "trendseek/scoring.hpp"
#include "trendseek/stats.hpp"

namespace trendseek {

struct ScoreOptions {
  double quantifier_threshold = 0.0;
  double y_tolerance = 0.05;
};

struct ScoreBounds {
  double lower = -1.0;
  double upper = 1.0;
};

/// A validated, normalized query flattened for repeated scoring. Immutable
/// after construction and safe to share across threads.
class CompiledQuery {
 public:
  /// Throws SemanticError when the query does not validate and
  /// Error(UnknownPattern) for unregistered user-defined patterns.
  explicit CompiledQuery(const ShapeQuery& ast, ScoreOptions options = {});
  ~CompiledQuery();
  CompiledQuery(CompiledQuery&&) noexcept;
  CompiledQuery& operator=(CompiledQuery&&) noexcept;

  const ShapeQuery& ast() const noexcept { return *ast_; }
  const ScoreOptions& options() const noexcept { return options_; }
  std::size_t k() const noexcept { return exprs_.size(); }
  std::size_t segment_count() const noexcept { return segments_.size(); }
  const ShapeSegment& segment(std::size_t i) const { return *segments_[i]; }
  std::size_t expr_of_segment(std::size_t i) const { return segment_expr_[i]; }
  bool has_cross_refs() const noexcept { return cross_refs_; }
  bool has_sketch() const noexcept { return sketch_; }

  /// Score of ShapeExpr j over bins [first, last]; `stats` must summarize
  /// exactly those bins.
  double score_expr(std::size_t j, const CandidateViz& viz, std::size_t first, std::size_t last,
                    const SummarizedStats& stats,
                    std::span<const std::optional<LineFit>> siblings = {}) const;

  /// score_expr with the fit already computed (null when undefined).
  double score_expr_fitted(std::size_t j, const CandidateViz& viz, std::size_t first,
                           std::size_t last, const LineFit* fit,
                           std::span<const std::optional<LineFit>> siblings = {}) const;

  /// Same as score_expr but without location gates; ranks partial segments.
  double provisional_score(std::size_t j, const CandidateViz& viz, std::size_t first,
                           std::size_t last, const SummarizedStats& stats) const;

  std::optional<double> expr_x_start(std::size_t j) const { return exprs_[j].x_start; }
  std::optional<double> expr_x_end(std::size_t j) const { return exprs_[j].x_end; }

  /// Required bin for each breakpoint 0..k, from explicit x locations of the
  /// adjacent ShapeExprs. Only interior entries (1..k-1) are ever set.
  /// Throws Error(InfeasibleSegmentation) when two locations disagree.
  std::vector<std::optional<std::size_t>> pins(const CandidateViz& viz) const;

  /// Score interval implied by every ShapeExpr's slope lying in [lo, hi].
  ScoreBounds envelope_bounds(double slope_lo, double slope_hi) const;

 private:
  struct Node {
    NodeKind kind = NodeKind::Segment;
    std::uint32_t first_child = 0;
    std::uint32_t child_count = 0;
    std::uint32_t segment = 0;
  };
  struct Expr {
    std::uint32_t root = 0;
    std::optional<double> x_start;
    std::optional<double> x_end;
  };

  // Compiles an already validated and normalized sub-query.
  CompiledQuery(const ShapeQuery& normalized, ScoreOptions options, bool);

  std::uint32_t flatten(const ShapeQuery& q, std::size_t expr);
  double eval(std::uint32_t node, const CandidateViz& viz, std::size_t first, std::size_t last,
              const LineFit* fit, const ScoreContext& ctx, bool gated) const;
  ScoreBounds node_bounds(std::uint32_t node, double lo, double hi) const;

  std::shared_ptr<const ShapeQuery> ast_;
  ScoreOptions options_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> children_;
  std::vector<Expr> exprs_;
  std::vector<const ShapeSegment*> segments_;
  std::vector<std::size_t> segment_expr_;
  std::vector<std::unique_ptr<CompiledQuery>> nested_;  // by segment index
  std::vector<std::unique_ptr<CompiledQuery>> inner_;   // CONCATs below AND/OR/NOT
  bool cross_refs_ = false;
  bool sketch_ = false;
};

}  // namespace trendseek
