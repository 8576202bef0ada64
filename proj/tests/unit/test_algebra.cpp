#include <gtest/gtest.h>

#include "ast_gen.hpp"
#include "trendseek/algebra.hpp"

using namespace trendseek;

namespace {

using Q = ShapeQuery;

bool has_issue(const ValidationReport& r, const std::string& code) {
  for (const auto& i : r.issues) {
    if (i.code == code) return true;
  }
  return false;
}

Q up() { return Q::seg(Pattern::up()); }
Q down() { return Q::seg(Pattern::down()); }
Q flat() { return Q::seg(Pattern::flat()); }

}  // namespace

TEST(Algebra, MinimalQueryIsValid) {
  const auto r = validate_ast(up());
  EXPECT_TRUE(r.ok);
  EXPECT_TRUE(r.issues.empty());
}

TEST(Algebra, PositionRefOutOfRange) {
  PositionRef ref;
  ref.index = 5;
  const auto r = validate_ast(Q::seg(Pattern::position(ref)));
  EXPECT_FALSE(r.ok);
  EXPECT_TRUE(has_issue(r, "BAD_POSITION_REF"));
}

TEST(Algebra, SelfReferenceIsRejected) {
  PositionRef ref;
  ref.index = 1;
  const auto r = validate_ast(Q::concat({up(), Q::seg(Pattern::position(ref))}));
  EXPECT_TRUE(has_issue(r, "SELF_POSITION_REF"));
  ref.index = 0;
  EXPECT_TRUE(validate_ast(Q::concat({up(), Q::seg(Pattern::position(ref))})).ok);
}

TEST(Algebra, RelativeReferences) {
  PositionRef prev;
  prev.mode = PositionRef::Mode::Previous;
  EXPECT_FALSE(validate_ast(Q::concat({Q::seg(Pattern::position(prev)), up()})).ok);
  EXPECT_TRUE(validate_ast(Q::concat({up(), Q::seg(Pattern::position(prev))})).ok);
  EXPECT_EQ(resolve_position(prev, 3, 5), 2u);
  PositionRef next;
  next.mode = PositionRef::Mode::Next;
  EXPECT_EQ(resolve_position(next, 4, 5), std::nullopt);
}

TEST(Algebra, SketchMixedWithPatterns) {
  const auto sketch = Q::seg(Pattern::sketch_of({{0, 0}, {1, 1}}));
  const auto r = validate_ast(Q::all_of({sketch, up()}));
  EXPECT_TRUE(has_issue(r, "MIXED_SKETCH"));
  EXPECT_TRUE(validate_ast(sketch).ok);
}

TEST(Algebra, SegmentInvariants) {
  ShapeSegment s;
  s.pattern = Pattern::theta(90.0);
  EXPECT_TRUE(has_issue(validate_ast(Q::seg(s)), "THETA_RANGE"));

  s.pattern = Pattern::up();
  s.location.x_start = 5;
  s.location.x_end = 5;
  EXPECT_TRUE(has_issue(validate_ast(Q::seg(s)), "LOCATION_ORDER"));

  s.location.iterator_width = 3;
  EXPECT_TRUE(has_issue(validate_ast(Q::seg(s)), "ITERATOR_CONFLICT"));

  ShapeSegment sk;
  sk.pattern = Pattern::sketch_of({{1, 0}, {1, 1}});
  EXPECT_TRUE(has_issue(validate_ast(Q::seg(sk)), "SKETCH_ORDER"));
  sk.pattern = Pattern::sketch_of({{1, 0}});
  EXPECT_TRUE(has_issue(validate_ast(Q::seg(sk)), "SKETCH_POINTS"));

  ShapeSegment q;
  q.pattern = Pattern::any();
  q.modifier.quantifier = Quantifier{2, std::nullopt};
  EXPECT_TRUE(has_issue(validate_ast(Q::seg(q)), "QUANTIFIER_MISUSE"));
  q.pattern = Pattern::up();
  q.modifier.quantifier = Quantifier{3, 2};
  EXPECT_TRUE(has_issue(validate_ast(Q::seg(q)), "QUANTIFIER_RANGE"));

  ShapeSegment c;
  c.pattern = Pattern::flat();
  c.modifier.comparator = Comparator::Greater;
  EXPECT_TRUE(has_issue(validate_ast(Q::seg(c)), "COMPARATOR_MISUSE"));
}

TEST(Algebra, NestedRangeMustFitParent) {
  ShapeSegment inner;
  inner.pattern = Pattern::up();
  inner.location.x_start = 20;
  ShapeSegment outer;
  outer.location.x_start = 0;
  outer.location.x_end = 10;
  outer.pattern = Pattern::nested_query(Q::seg(inner));
  EXPECT_TRUE(has_issue(validate_ast(Q::seg(outer)), "NESTED_RANGE"));
  inner.location.x_start = 5;
  outer.pattern = Pattern::nested_query(Q::seg(inner));
  EXPECT_TRUE(validate_ast(Q::seg(outer)).ok);
}

TEST(Algebra, ArityAndDepth) {
  Q bad;
  bad.kind = NodeKind::Concat;
  bad.children = {up()};
  EXPECT_TRUE(has_issue(validate_ast(bad), "ARITY"));

  Q deep = up();
  for (int i = 0; i < 20; ++i) deep = Q::negate(deep);
  EXPECT_TRUE(has_issue(validate_ast(deep), "DEPTH_LIMIT"));
}

TEST(Algebra, NormalizeFlattensSameKind) {
  const auto a = up(), b = down(), c = flat();
  EXPECT_EQ(normalize_ast(Q::concat({Q::concat({a, b}), c})), Q::concat({a, b, c}));
  EXPECT_EQ(normalize_ast(Q::any_of({a, Q::any_of({b, c})})), Q::any_of({a, b, c}));
  EXPECT_EQ(normalize_ast(Q::negate(Q::negate(up()))), up());
  // different kinds stay nested
  const auto mixed = Q::concat({a, Q::any_of({b, Q::concat({c, a})})});
  EXPECT_EQ(normalize_ast(mixed), mixed);
}

TEST(Algebra, NormalizeReachesNestedPatterns) {
  ShapeSegment s;
  s.pattern = Pattern::nested_query(Q::concat({Q::concat({up(), down()}), flat()}));
  const auto n = normalize_ast(Q::seg(s));
  ASSERT_TRUE(n.segment.pattern.nested);
  EXPECT_EQ(n.segment.pattern.nested->children.size(), 3u);
}

TEST(Algebra, ExprCountIsPreservedByNormalize) {
  EXPECT_EQ(expr_count(Q::concat({Q::concat({up(), down()}), flat()})), 3u);
  EXPECT_EQ(expr_count(Q::all_of({up(), down()})), 1u);
  gen::AstGenerator g(17);
  for (int i = 0; i < 300; ++i) {
    const auto q = g.next();
    EXPECT_EQ(expr_count(normalize_ast(q)), expr_count(q));
    EXPECT_TRUE(validate_ast(normalize_ast(q)).ok);
  }
}

TEST(Algebra, PreorderAndPredicates) {
  ShapeSegment ys;
  ys.pattern = Pattern::up();
  ys.location.y_start = 3;
  const auto q = Q::concat({up(), Q::all_of({down(), Q::seg(ys)})});
  const auto segs = segments_preorder(q);
  ASSERT_EQ(segs.size(), 3u);
  EXPECT_EQ(segs[1]->pattern.kind, PatternKind::Down);
  EXPECT_TRUE(has_y_constraints(q));
  EXPECT_FALSE(has_sketch(q));
  EXPECT_EQ(depth(q), 3u);
}
