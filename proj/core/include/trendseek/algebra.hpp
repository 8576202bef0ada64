#pragma once

// Shape query algebra: the AST that the parser produces and the engines run.
//
// A query is a tree of ShapeSegments (leaves) combined with CONCAT, AND, OR
// and NOT. After normalization the operands of a top-level CONCAT are the
// query's ShapeExprs; each one is matched against exactly one contiguous
// region of a trendline.

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace trendseek {

inline constexpr std::size_t kMaxQueryDepth = 16;

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct ShapeQuery;

struct PositionRef {
  enum class Mode { Absolute, Previous, Next };
  Mode mode = Mode::Absolute;
  std::size_t index = 0;  // only meaningful for Absolute
  friend bool operator==(const PositionRef&, const PositionRef&) = default;
};

enum class PatternKind { Up, Down, Flat, Theta, Any, Empty, Sketch, PositionRef, Nested, Udp };

struct Pattern {
  PatternKind kind = PatternKind::Any;
  double angle_deg = 0.0;                     // Theta
  std::vector<Point> sketch;                  // Sketch
  PositionRef ref;                            // PositionRef
  std::shared_ptr<const ShapeQuery> nested;   // Nested
  std::string udp;                            // Udp

  static Pattern of(PatternKind k) {
    Pattern p;
    p.kind = k;
    return p;
  }
  static Pattern up() { return of(PatternKind::Up); }
  static Pattern down() { return of(PatternKind::Down); }
  static Pattern flat() { return of(PatternKind::Flat); }
  static Pattern any() { return of(PatternKind::Any); }
  static Pattern empty() { return of(PatternKind::Empty); }
  static Pattern theta(double degrees);
  static Pattern sketch_of(std::vector<Point> points);
  static Pattern position(PositionRef ref);
  static Pattern nested_query(ShapeQuery query);
  static Pattern user_defined(std::string name);

  bool is_slope_pattern() const noexcept {
    return kind == PatternKind::Up || kind == PatternKind::Down || kind == PatternKind::Flat ||
           kind == PatternKind::Theta;
  }
};

bool operator==(const Pattern& a, const Pattern& b);

struct Location {
  std::optional<double> x_start;
  std::optional<double> x_end;
  std::optional<double> y_start;
  std::optional<double> y_end;
  std::optional<std::size_t> iterator_width;  // x.s=., x.e=.+w

  bool has_x() const noexcept { return x_start || x_end; }
  bool has_y() const noexcept { return y_start || y_end; }
  bool empty() const noexcept { return !has_x() && !has_y() && !iterator_width; }
  friend bool operator==(const Location&, const Location&) = default;
};

enum class Comparator { Less, LessMuch, Greater, GreaterMuch, Equal };

struct Quantifier {
  std::size_t min = 0;
  std::optional<std::size_t> max;
  friend bool operator==(const Quantifier&, const Quantifier&) = default;
};

struct Modifier {
  std::optional<Quantifier> quantifier;
  std::optional<Comparator> comparator;
  std::optional<double> multiplier;

  bool empty() const noexcept { return !quantifier && !comparator && !multiplier; }
  friend bool operator==(const Modifier&, const Modifier&) = default;
};

struct ShapeSegment {
  Location location;
  Pattern pattern;
  Modifier modifier;
  friend bool operator==(const ShapeSegment&, const ShapeSegment&) = default;
};

enum class NodeKind { Segment, Concat, And, Or, Not };

/// Immutable once built; safe to share across threads.
struct ShapeQuery {
  NodeKind kind = NodeKind::Segment;
  ShapeSegment segment;               // kind == Segment
  std::vector<ShapeQuery> children;   // operators

  static ShapeQuery seg(ShapeSegment s);
  static ShapeQuery seg(Pattern p);
  static ShapeQuery concat(std::vector<ShapeQuery> children);
  static ShapeQuery all_of(std::vector<ShapeQuery> children);
  static ShapeQuery any_of(std::vector<ShapeQuery> children);
  static ShapeQuery negate(ShapeQuery child);

  bool is_segment() const noexcept { return kind == NodeKind::Segment; }
  friend bool operator==(const ShapeQuery&, const ShapeQuery&) = default;
};

struct ValidationIssue {
  std::string code;
  std::string message;
  std::string path;  // "/1/0" style child-index path from the root
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationIssue> issues;
};

ValidationReport validate_ast(const ShapeQuery& ast);

/// Flattens same-kind n-ary nodes and removes double negation, recursively
/// (including nested pattern sub-queries).
ShapeQuery normalize_ast(const ShapeQuery& ast);

/// Number of ShapeExprs: top-level CONCAT operands after normalization.
std::size_t expr_count(const ShapeQuery& ast);

/// Top-level ShapeExprs of an already-normalized query.
std::vector<const ShapeQuery*> shape_exprs(const ShapeQuery& normalized);

/// ShapeSegments in preorder; this is the index space of PositionRef.
std::vector<const ShapeSegment*> segments_preorder(const ShapeQuery& ast);

std::size_t depth(const ShapeQuery& ast);

bool has_sketch(const ShapeQuery& ast);
bool has_y_constraints(const ShapeQuery& ast);

/// Resolves a reference made by the segment at `self` to an absolute index.
/// Returns nullopt when it points outside [0, count) or at itself.
std::optional<std::size_t> resolve_position(const PositionRef& ref, std::size_t self,
                                            std::size_t count);

}  // namespace trendseek
