#include "trendseek/algebra.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace trendseek {

Pattern Pattern::theta(double degrees) {
  Pattern p = of(PatternKind::Theta);
  p.angle_deg = degrees;
  return p;
}

Pattern Pattern::sketch_of(std::vector<Point> points) {
  Pattern p = of(PatternKind::Sketch);
  p.sketch = std::move(points);
  return p;
}

Pattern Pattern::position(PositionRef ref) {
  Pattern p = of(PatternKind::PositionRef);
  p.ref = ref;
  return p;
}

Pattern Pattern::nested_query(ShapeQuery query) {
  Pattern p = of(PatternKind::Nested);
  p.nested = std::make_shared<const ShapeQuery>(std::move(query));
  return p;
}

Pattern Pattern::user_defined(std::string name) {
  Pattern p = of(PatternKind::Udp);
  p.udp = std::move(name);
  return p;
}

bool operator==(const Pattern& a, const Pattern& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case PatternKind::Theta:
      return a.angle_deg == b.angle_deg;
    case PatternKind::Sketch:
      return a.sketch == b.sketch;
    case PatternKind::PositionRef:
      return a.ref == b.ref;
    case PatternKind::Nested:
      if (!a.nested || !b.nested) return a.nested == b.nested;
      return *a.nested == *b.nested;
    case PatternKind::Udp:
      return a.udp == b.udp;
    default:
      return true;
  }
}

ShapeQuery ShapeQuery::seg(ShapeSegment s) {
  ShapeQuery q;
  q.kind = NodeKind::Segment;
  q.segment = std::move(s);
  return q;
}

ShapeQuery ShapeQuery::seg(Pattern p) {
  ShapeSegment s;
  s.pattern = std::move(p);
  return seg(std::move(s));
}

namespace {

ShapeQuery make_op(NodeKind kind, std::vector<ShapeQuery> children) {
  ShapeQuery q;
  q.kind = kind;
  q.children = std::move(children);
  return q;
}

}  // namespace

ShapeQuery ShapeQuery::concat(std::vector<ShapeQuery> children) {
  return make_op(NodeKind::Concat, std::move(children));
}
ShapeQuery ShapeQuery::all_of(std::vector<ShapeQuery> children) {
  return make_op(NodeKind::And, std::move(children));
}
ShapeQuery ShapeQuery::any_of(std::vector<ShapeQuery> children) {
  return make_op(NodeKind::Or, std::move(children));
}
ShapeQuery ShapeQuery::negate(ShapeQuery child) {
  std::vector<ShapeQuery> c;
  c.push_back(std::move(child));
  return make_op(NodeKind::Not, std::move(c));
}

namespace {

void collect_segments(const ShapeQuery& q, std::vector<const ShapeSegment*>& out) {
  if (q.is_segment()) {
    out.push_back(&q.segment);
    return;
  }
  for (const auto& c : q.children) collect_segments(c, out);
}

std::size_t depth_of(const ShapeQuery& q, std::size_t limit) {
  // Stops descending once the limit is exceeded so hostile inputs stay cheap.
  if (limit == 0) return 1;
  if (q.is_segment()) {
    if (q.segment.pattern.kind == PatternKind::Nested && q.segment.pattern.nested) {
      return 1 + depth_of(*q.segment.pattern.nested, limit - 1);
    }
    return 1;
  }
  std::size_t best = 0;
  for (const auto& c : q.children) best = std::max(best, depth_of(c, limit - 1));
  return 1 + best;
}

class Validator {
 public:
  explicit Validator(ValidationReport& report) : report_(report) {}

  void run(const ShapeQuery& root, const std::string& prefix,
           const std::optional<std::pair<double, double>>& parent_range) {
    std::vector<const ShapeSegment*> segs;
    collect_segments(root, segs);
    std::size_t seg_index = 0;
    visit(root, prefix.empty() ? std::string() : prefix, segs, seg_index, parent_range);
  }

 private:
  void issue(std::string code, std::string message, const std::string& path) {
    report_.ok = false;
    report_.issues.push_back({std::move(code), std::move(message), path.empty() ? "/" : path});
  }

  void visit(const ShapeQuery& q, const std::string& path,
             const std::vector<const ShapeSegment*>& segs, std::size_t& seg_index,
             const std::optional<std::pair<double, double>>& parent_range) {
    switch (q.kind) {
      case NodeKind::Segment:
        check_segment(q.segment, path, segs, seg_index++, parent_range);
        return;
      case NodeKind::Not:
        if (q.children.size() != 1) issue("ARITY", "NOT takes exactly one operand", path);
        break;
      default:
        if (q.children.size() < 2) issue("ARITY", "operator needs at least two operands", path);
        break;
    }
    for (std::size_t i = 0; i < q.children.size(); ++i) {
      visit(q.children[i], path + "/" + std::to_string(i), segs, seg_index, parent_range);
    }
  }

  void check_segment(const ShapeSegment& s, const std::string& path,
                     const std::vector<const ShapeSegment*>& segs, std::size_t self,
                     const std::optional<std::pair<double, double>>& parent_range) {
    const auto& loc = s.location;
    const auto& p = s.pattern;
    const auto& m = s.modifier;

    if (loc.x_start && loc.x_end && !(*loc.x_start < *loc.x_end)) {
      issue("LOCATION_ORDER", "x.s must be smaller than x.e", path);
    }
    if (loc.iterator_width) {
      if (loc.x_start || loc.x_end) {
        issue("ITERATOR_CONFLICT", "iterator width cannot be combined with explicit x.s/x.e",
              path);
      }
      if (*loc.iterator_width == 0) issue("ITERATOR_WIDTH", "iterator width must be positive", path);
    }
    if (parent_range) {
      const auto [lo, hi] = *parent_range;
      if ((loc.x_start && (*loc.x_start < lo || *loc.x_start > hi)) ||
          (loc.x_end && (*loc.x_end < lo || *loc.x_end > hi))) {
        issue("NESTED_RANGE", "nested x-range lies outside the enclosing segment", path);
      }
    }

    switch (p.kind) {
      case PatternKind::Theta:
        if (!(p.angle_deg > -90.0 && p.angle_deg < 90.0)) {
          issue("THETA_RANGE", "slope angle must lie strictly inside (-90, 90) degrees", path);
        }
        break;
      case PatternKind::Sketch:
        if (p.sketch.size() < 2) issue("SKETCH_POINTS", "a sketch needs at least two points", path);
        for (std::size_t i = 1; i < p.sketch.size(); ++i) {
          if (!(p.sketch[i].x > p.sketch[i - 1].x)) {
            issue("SKETCH_ORDER", "sketch x values must be strictly increasing", path);
            break;
          }
        }
        if (!loc.empty() || !m.empty()) {
          issue("SKETCH_FIELDS", "a sketch segment cannot carry location or modifier values", path);
        }
        break;
      case PatternKind::PositionRef: {
        if (p.ref.mode == PositionRef::Mode::Absolute && p.ref.index == self) {
          issue("SELF_POSITION_REF", "a segment cannot reference itself", path);
        } else if (!resolve_position(p.ref, self, segs.size())) {
          issue("BAD_POSITION_REF", "position reference does not name another segment", path);
        }
        break;
      }
      case PatternKind::Nested:
        if (!p.nested) {
          issue("NESTED_EMPTY", "nested pattern has no query", path);
        } else {
          std::optional<std::pair<double, double>> range;
          if (loc.x_start && loc.x_end) range = std::make_pair(*loc.x_start, *loc.x_end);
          Validator(report_).run(*p.nested, path + "/p", range);
        }
        break;
      case PatternKind::Udp:
        if (p.udp.empty()) issue("UDP_NAME", "user-defined pattern needs a name", path);
        break;
      default:
        break;
    }

    if (m.quantifier) {
      if (m.quantifier->max && *m.quantifier->max < m.quantifier->min) {
        issue("QUANTIFIER_RANGE", "quantifier maximum is below its minimum", path);
      }
      if (!p.is_slope_pattern()) {
        issue("QUANTIFIER_MISUSE", "quantifiers apply only to up/down/flat/slope patterns", path);
      }
    }
    if (m.comparator) {
      const bool sharpness = p.kind == PatternKind::Up || p.kind == PatternKind::Down;
      if (p.kind != PatternKind::PositionRef && !sharpness) {
        issue("COMPARATOR_MISUSE",
              "comparators apply to position references (or sharpness of up/down)", path);
      }
    }
    if (m.multiplier) {
      if (p.kind != PatternKind::PositionRef || !m.comparator ||
          (*m.comparator != Comparator::Less && *m.comparator != Comparator::Greater)) {
        issue("MULTIPLIER_MISUSE", "a ratio needs a position reference and a '<' or '>' comparator",
              path);
      }
      if (!(*m.multiplier > 0.0) || !std::isfinite(*m.multiplier)) {
        issue("MULTIPLIER_MISUSE", "ratio must be positive", path);
      }
    }
  }

  ValidationReport& report_;
};

bool any_segment(const ShapeQuery& q, bool (*pred)(const ShapeSegment&)) {
  if (q.is_segment()) {
    if (pred(q.segment)) return true;
    if (q.segment.pattern.kind == PatternKind::Nested && q.segment.pattern.nested) {
      return any_segment(*q.segment.pattern.nested, pred);
    }
    return false;
  }
  for (const auto& c : q.children) {
    if (any_segment(c, pred)) return true;
  }
  return false;
}

}  // namespace

std::optional<std::size_t> resolve_position(const PositionRef& ref, std::size_t self,
                                            std::size_t count) {
  std::size_t target = 0;
  switch (ref.mode) {
    case PositionRef::Mode::Absolute:
      target = ref.index;
      break;
    case PositionRef::Mode::Previous:
      if (self == 0) return std::nullopt;
      target = self - 1;
      break;
    case PositionRef::Mode::Next:
      target = self + 1;
      break;
  }
  if (target >= count || target == self) return std::nullopt;
  return target;
}

std::size_t depth(const ShapeQuery& ast) { return depth_of(ast, kMaxQueryDepth + 1); }

ValidationReport validate_ast(const ShapeQuery& ast) {
  ValidationReport report;
  if (depth(ast) > kMaxQueryDepth) {
    report.ok = false;
    report.issues.push_back({"DEPTH_LIMIT",
                             "query nesting exceeds " + std::to_string(kMaxQueryDepth) + " levels",
                             "/"});
    return report;
  }
  Validator(report).run(ast, "", std::nullopt);

  const bool sketch = any_segment(ast, [](const ShapeSegment& s) {
    return s.pattern.kind == PatternKind::Sketch;
  });
  const bool semantic = any_segment(ast, [](const ShapeSegment& s) {
    return s.pattern.kind != PatternKind::Sketch && s.pattern.kind != PatternKind::Nested;
  });
  if (sketch && semantic) {
    report.ok = false;
    report.issues.push_back(
        {"MIXED_SKETCH", "sketches cannot be combined with other pattern primitives", "/"});
  }
  return report;
}

ShapeQuery normalize_ast(const ShapeQuery& ast) {
  if (ast.is_segment()) {
    ShapeQuery out = ast;
    auto& p = out.segment.pattern;
    if (p.kind == PatternKind::Nested && p.nested) {
      p.nested = std::make_shared<const ShapeQuery>(normalize_ast(*p.nested));
    }
    return out;
  }
  if (ast.kind == NodeKind::Not) {
    if (ast.children.size() == 1 && ast.children[0].kind == NodeKind::Not &&
        ast.children[0].children.size() == 1) {
      return normalize_ast(ast.children[0].children[0]);
    }
    ShapeQuery out;
    out.kind = NodeKind::Not;
    for (const auto& c : ast.children) out.children.push_back(normalize_ast(c));
    // Inner normalization can expose a fresh double negation.
    if (out.children.size() == 1 && out.children[0].kind == NodeKind::Not &&
        out.children[0].children.size() == 1) {
      return out.children[0].children[0];
    }
    return out;
  }
  ShapeQuery out;
  out.kind = ast.kind;
  for (const auto& c : ast.children) {
    ShapeQuery n = normalize_ast(c);
    if (n.kind == ast.kind) {
      for (auto& g : n.children) out.children.push_back(std::move(g));
    } else {
      out.children.push_back(std::move(n));
    }
  }
  return out;
}

std::vector<const ShapeQuery*> shape_exprs(const ShapeQuery& normalized) {
  std::vector<const ShapeQuery*> out;
  if (normalized.kind == NodeKind::Concat) {
    for (const auto& c : normalized.children) out.push_back(&c);
  } else {
    out.push_back(&normalized);
  }
  return out;
}

std::size_t expr_count(const ShapeQuery& ast) {
  const ShapeQuery n = normalize_ast(ast);
  return n.kind == NodeKind::Concat ? n.children.size() : 1;
}

std::vector<const ShapeSegment*> segments_preorder(const ShapeQuery& ast) {
  std::vector<const ShapeSegment*> out;
  collect_segments(ast, out);
  return out;
}

bool has_sketch(const ShapeQuery& ast) {
  return any_segment(ast, [](const ShapeSegment& s) {
    return s.pattern.kind == PatternKind::Sketch;
  });
}

bool has_y_constraints(const ShapeQuery& ast) {
  return any_segment(ast, [](const ShapeSegment& s) { return s.location.has_y(); });
}

}  // namespace trendseek
