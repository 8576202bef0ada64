#include "trendseek/compiled.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "segment_eval.hpp"
#include "trendseek/engines.hpp"
#include "trendseek/errors.hpp"
#include "trendseek/parser.hpp"

namespace trendseek {

namespace {

bool contains_not(const ShapeQuery& q) {
  if (q.kind == NodeKind::Not) return true;
  for (const auto& c : q.children) {
    if (contains_not(c)) return true;
  }
  return false;
}

// Common x location of every segment in the expr, if they all carry one.
template <typename Get>
std::optional<double> shared_location(const ShapeQuery& expr, Get get) {
  if (contains_not(expr)) return std::nullopt;
  std::vector<const ShapeSegment*> segs;
  segs = segments_preorder(expr);
  std::optional<double> value;
  for (const auto* s : segs) {
    auto v = get(*s);
    if (!v) return std::nullopt;
    if (value && *value != *v) return std::nullopt;
    value = v;
  }
  return value;
}

std::size_t nearest_bin(const CandidateViz& viz, double x) {
  auto it = std::lower_bound(viz.bins.begin(), viz.bins.end(), x,
                             [](const Bin& b, double v) { return b.x < v; });
  if (it == viz.bins.end()) return viz.size() - 1;
  const auto idx = static_cast<std::size_t>(it - viz.bins.begin());
  if (idx == 0) return 0;
  return (x - viz.bins[idx - 1].x <= it->x - x) ? idx - 1 : idx;
}

ScoreBounds slope_pattern_bounds(const Pattern& p, const std::optional<Comparator>& sharp,
                                 double lo, double hi) {
  const double a = score_slope_pattern(p, sharp, lo);
  const double b = score_slope_pattern(p, sharp, hi);
  ScoreBounds out{std::min(a, b), std::max(a, b)};
  // Flat and Theta (and sharpened Up/Down) peak strictly inside the range.
  std::optional<double> peak;
  if (p.kind == PatternKind::Flat) {
    peak = 0.0;
  } else if (p.kind == PatternKind::Theta) {
    peak = std::tan(p.angle_deg * std::numbers::pi / 180.0);
  } else if (sharp && *sharp != Comparator::Equal) {
    const double deg = (*sharp == Comparator::Greater || *sharp == Comparator::GreaterMuch) ? 67.5
                                                                                             : 22.5;
    peak = std::tan((p.kind == PatternKind::Up ? deg : -deg) * std::numbers::pi / 180.0);
  }
  if (peak && *peak >= lo && *peak <= hi) out.upper = 1.0;
  return out;
}

}  // namespace

CompiledQuery::CompiledQuery(const ShapeQuery& ast, ScoreOptions options) : options_(options) {
  ValidationReport report = validate_ast(ast);
  if (!report.ok) throw SemanticError(std::move(report));
  ast_ = std::make_shared<const ShapeQuery>(normalize_ast(ast));
  segments_ = segments_preorder(*ast_);
  segment_expr_.assign(segments_.size(), 0);
  nested_.resize(segments_.size());
  const auto roots = shape_exprs(*ast_);
  exprs_.resize(roots.size());
  for (std::size_t j = 0; j < roots.size(); ++j) {
    exprs_[j].root = flatten(*roots[j], j);
    exprs_[j].x_start =
        shared_location(*roots[j], [](const ShapeSegment& s) { return s.location.x_start; });
    exprs_[j].x_end =
        shared_location(*roots[j], [](const ShapeSegment& s) { return s.location.x_end; });
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Pattern& p = segments_[i]->pattern;
    switch (p.kind) {
      case PatternKind::Nested:
        nested_[i] = std::make_unique<CompiledQuery>(*p.nested, options_);
        break;
      case PatternKind::Udp:
        if (!find_udp(p.udp)) {
          throw Error(ErrorCode::UnknownPattern, "no user-defined pattern named '" + p.udp + "'");
        }
        break;
      case PatternKind::PositionRef:
        cross_refs_ = true;
        break;
      case PatternKind::Sketch:
        sketch_ = true;
        break;
      default:
        break;
    }
  }
}

CompiledQuery::~CompiledQuery() = default;
CompiledQuery::CompiledQuery(CompiledQuery&&) noexcept = default;
CompiledQuery& CompiledQuery::operator=(CompiledQuery&&) noexcept = default;

std::uint32_t CompiledQuery::flatten(const ShapeQuery& q, std::size_t expr) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back({});
  nodes_[id].kind = q.kind;
  if (q.is_segment()) {
    // Segments are visited in preorder, matching segments_preorder().
    std::size_t seg = 0;
    while (segments_[seg] != &q.segment) ++seg;
    nodes_[id].segment = static_cast<std::uint32_t>(seg);
    segment_expr_[seg] = expr;
    return id;
  }
  if (q.kind == NodeKind::Concat) {
    // A CONCAT below AND/OR/NOT splits its region again; solve it as a sub-query.
    nodes_[id].segment = static_cast<std::uint32_t>(inner_.size());
    inner_.push_back(std::unique_ptr<CompiledQuery>(new CompiledQuery(q, options_, false)));
    for (const auto* s : segments_preorder(q)) {
      std::size_t seg = 0;
      while (segments_[seg] != s) ++seg;
      segment_expr_[seg] = expr;
    }
    return id;
  }
  std::vector<std::uint32_t> kids;
  for (const auto& c : q.children) kids.push_back(flatten(c, expr));
  nodes_[id].first_child = static_cast<std::uint32_t>(children_.size());
  nodes_[id].child_count = static_cast<std::uint32_t>(kids.size());
  children_.insert(children_.end(), kids.begin(), kids.end());
  return id;
}

CompiledQuery::CompiledQuery(const ShapeQuery& normalized, ScoreOptions options, bool)
    : options_(options) {
  ast_ = std::make_shared<const ShapeQuery>(normalized);
  segments_ = segments_preorder(*ast_);
  segment_expr_.assign(segments_.size(), 0);
  nested_.resize(segments_.size());
  const auto roots = shape_exprs(*ast_);
  exprs_.resize(roots.size());
  for (std::size_t j = 0; j < roots.size(); ++j) exprs_[j].root = flatten(*roots[j], j);
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Pattern& p = segments_[i]->pattern;
    if (p.kind == PatternKind::Nested) nested_[i] = std::make_unique<CompiledQuery>(*p.nested, options_);
    if (p.kind == PatternKind::PositionRef) cross_refs_ = true;
    if (p.kind == PatternKind::Sketch) sketch_ = true;
  }
}

double CompiledQuery::eval(std::uint32_t node, const CandidateViz& viz, std::size_t first,
                           std::size_t last, const LineFit* fit, const ScoreContext& ctx,
                           bool gated) const {
  const Node& n = nodes_[node];
  switch (n.kind) {
    case NodeKind::Segment:
      return detail::eval_segment(*segments_[n.segment], n.segment, nested_[n.segment].get(), viz,
                                  first, last, fit, ctx, gated);
    case NodeKind::Concat: {
      const CompiledQuery& inner = *inner_[n.segment];
      if (last - first < inner.k()) return -1.0;
      try {
        return solve_dp(inner, slice_viz(viz, first, last)).total;
      } catch (const Error&) {
        return -1.0;
      }
    }
    case NodeKind::Not:
      return -eval(children_[n.first_child], viz, first, last, fit, ctx, gated);
    case NodeKind::And: {
      double v = 1.0;
      for (std::uint32_t c = 0; c < n.child_count; ++c) {
        v = std::min(v, eval(children_[n.first_child + c], viz, first, last, fit, ctx, gated));
      }
      return v;
    }
    case NodeKind::Or: {
      double v = -1.0;
      for (std::uint32_t c = 0; c < n.child_count; ++c) {
        v = std::max(v, eval(children_[n.first_child + c], viz, first, last, fit, ctx, gated));
      }
      return v;
    }
  }
  return -1.0;
}

double CompiledQuery::score_expr(std::size_t j, const CandidateViz& viz, std::size_t first,
                                 std::size_t last, const SummarizedStats& stats,
                                 std::span<const std::optional<LineFit>> siblings) const {
  auto fit = try_fit_line(stats);
  if (fit) {
    fit->x_start = first;
    fit->x_end = last;
  }
  ScoreContext ctx{siblings, options_.quantifier_threshold, options_.y_tolerance};
  return eval(exprs_[j].root, viz, first, last, fit ? &*fit : nullptr, ctx, true);
}

double CompiledQuery::score_expr_fitted(std::size_t j, const CandidateViz& viz, std::size_t first,
                                        std::size_t last, const LineFit* fit,
                                        std::span<const std::optional<LineFit>> siblings) const {
  ScoreContext ctx{siblings, options_.quantifier_threshold, options_.y_tolerance};
  return eval(exprs_[j].root, viz, first, last, fit, ctx, true);
}

double CompiledQuery::provisional_score(std::size_t j, const CandidateViz& viz, std::size_t first,
                                        std::size_t last, const SummarizedStats& stats) const {
  auto fit = try_fit_line(stats);
  if (fit) {
    fit->x_start = first;
    fit->x_end = last;
  }
  ScoreContext ctx{{}, options_.quantifier_threshold, options_.y_tolerance};
  return eval(exprs_[j].root, viz, first, last, fit ? &*fit : nullptr, ctx, false);
}

std::vector<std::optional<std::size_t>> CompiledQuery::pins(const CandidateViz& viz) const {
  std::vector<std::optional<std::size_t>> out(k() + 1);
  if (viz.bins.empty()) return out;
  for (std::size_t j = 1; j < k(); ++j) {
    std::optional<std::size_t> pin;
    if (exprs_[j - 1].x_end) pin = nearest_bin(viz, *exprs_[j - 1].x_end);
    if (exprs_[j].x_start) {
      const std::size_t b = nearest_bin(viz, *exprs_[j].x_start);
      if (pin && *pin != b) {
        throw Error(ErrorCode::InfeasibleSegmentation,
                    "adjacent ShapeExprs disagree on breakpoint " + std::to_string(j));
      }
      pin = b;
    }
    out[j] = pin;
  }
  return out;
}

ScoreBounds CompiledQuery::node_bounds(std::uint32_t node, double lo, double hi) const {
  const Node& n = nodes_[node];
  switch (n.kind) {
    case NodeKind::Segment: {
      const ShapeSegment& s = *segments_[n.segment];
      const Pattern& p = s.pattern;
      ScoreBounds b{-1.0, 1.0};
      if (p.kind == PatternKind::Any) {
        b = {1.0, 1.0};
      } else if (p.kind == PatternKind::Empty) {
        b = {-1.0, -1.0};
      } else if (p.is_slope_pattern()) {
        b = slope_pattern_bounds(p, s.modifier.comparator, lo, hi);
        if (s.modifier.quantifier) {
          b.lower = -1.0;
          b.upper = std::max(b.upper, s.modifier.quantifier->min == 0 ? 0.0 : -1.0);
        }
      }
      if (s.location.iterator_width) b.lower = -1.0;
      if (s.location.has_x() || s.location.has_y()) b.lower = -1.0;
      return b;
    }
    case NodeKind::Concat: {
      const CompiledQuery& inner = *inner_[n.segment];
      ScoreBounds b{0.0, 0.0};
      for (const auto& e : inner.exprs_) {
        const ScoreBounds c = inner.node_bounds(e.root, lo, hi);
        b.lower += c.lower;
        b.upper += c.upper;
      }
      const double kk = static_cast<double>(inner.k());
      // A region too short for the split scores -1.
      return {-1.0, std::max(b.upper / kk, -1.0)};
    }
    case NodeKind::Not: {
      const ScoreBounds c = node_bounds(children_[n.first_child], lo, hi);
      return {-c.upper, -c.lower};
    }
    case NodeKind::And:
    case NodeKind::Or: {
      ScoreBounds b = node_bounds(children_[n.first_child], lo, hi);
      for (std::uint32_t c = 1; c < n.child_count; ++c) {
        const ScoreBounds o = node_bounds(children_[n.first_child + c], lo, hi);
        if (n.kind == NodeKind::And) {
          b = {std::min(b.lower, o.lower), std::min(b.upper, o.upper)};
        } else {
          b = {std::max(b.lower, o.lower), std::max(b.upper, o.upper)};
        }
      }
      return b;
    }
  }
  return {-1.0, 1.0};
}

ScoreBounds CompiledQuery::envelope_bounds(double slope_lo, double slope_hi) const {
  double lower = 0.0;
  double upper = 0.0;
  for (const auto& e : exprs_) {
    const ScoreBounds b = node_bounds(e.root, slope_lo, slope_hi);
    lower += b.lower;
    upper += b.upper;
  }
  const double kk = static_cast<double>(k());
  return {clamp_score(lower / kk), clamp_score(upper / kk)};
}

}  // namespace trendseek
