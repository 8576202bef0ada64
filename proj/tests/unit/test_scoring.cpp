#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "trendseek/errors.hpp"
#include "trendseek/scoring.hpp"

using namespace trendseek;

namespace {

LineFit fit_with(double slope) {
  LineFit f;
  f.slope = slope;
  return f;
}

// Best mean over `m` step-disjoint windows scoring above zero, by enumeration.
double best_disjoint_mean(const std::vector<double>& ys, std::size_t m) {
  struct W {
    std::size_t i, j;
    double s;
  };
  std::vector<W> ws;
  for (std::size_t i = 0; i + 1 < ys.size(); ++i) {
    for (std::size_t j = i + 1; j < ys.size(); ++j) {
      const double s = oracle::up(oracle::slope_of(ys, i, j));
      if (s > 0.0) ws.push_back({i, j, s});
    }
  }
  double best = -2.0;
  std::vector<std::size_t> pick;
  auto rec = [&](auto&& self, std::size_t from, std::size_t end_step) -> void {
    if (pick.size() == m) {
      double sum = 0.0;
      for (auto k : pick) sum += ws[k].s;
      best = std::max(best, sum / static_cast<double>(m));
      return;
    }
    for (std::size_t k = from; k < ws.size(); ++k) {
      if (ws[k].i < end_step) continue;
      pick.push_back(k);
      self(self, k + 1, ws[k].j);
      pick.pop_back();
    }
  };
  std::sort(ws.begin(), ws.end(), [](const W& a, const W& b) { return a.i < b.i; });
  rec(rec, 0, 0);
  return best;
}

}  // namespace

TEST(Pattern, Examples) {
  EXPECT_NEAR(score_pattern(Pattern::up(), fit_with(1.0)), 0.5, 1e-12);
  EXPECT_NEAR(score_pattern(Pattern::flat(), fit_with(0.0)), 1.0, 1e-12);
  EXPECT_NEAR(score_pattern(Pattern::down(), fit_with(-1.0)), 0.5, 1e-12);
  EXPECT_NEAR(score_pattern(Pattern::flat(), fit_with(1.0)), 0.0, 1e-12);
  EXPECT_NEAR(score_pattern(Pattern::theta(45.0), fit_with(1.0)), 1.0, 1e-12);
  EXPECT_EQ(score_pattern(Pattern::any(), fit_with(3.0)), 1.0);
  EXPECT_EQ(score_pattern(Pattern::empty(), fit_with(3.0)), -1.0);
  EXPECT_THROW(score_pattern(Pattern::user_defined("x"), fit_with(0.0)), Error);
}

TEST(Pattern, MonotoneAndAntisymmetric) {
  double prev_up = -2.0;
  double prev_down = 2.0;
  for (double s = -50.0; s <= 50.0; s += 0.25) {
    const double u = score_up(s);
    const double d = score_down(s);
    EXPECT_GT(u, prev_up);
    EXPECT_LT(d, prev_down);
    EXPECT_DOUBLE_EQ(u, -d);
    EXPECT_DOUBLE_EQ(d, score_up(-s));
    EXPECT_DOUBLE_EQ(score_flat(s), score_flat(-s));
    EXPECT_LE(score_flat(s), score_flat(0.0));
    prev_up = u;
    prev_down = d;
  }
}

TEST(Pattern, SharpnessRecentersOnTheta) {
  const auto up = Pattern::up();
  const double steep = std::tan(67.5 * std::numbers::pi / 180.0);
  EXPECT_NEAR(score_slope_pattern(up, Comparator::GreaterMuch, steep), 1.0, 1e-12);
  EXPECT_NEAR(score_slope_pattern(Pattern::down(), Comparator::Less, -std::tan(22.5 * std::numbers::pi / 180.0)),
              1.0, 1e-12);
  EXPECT_EQ(score_slope_pattern(up, Comparator::Equal, 1.0), score_up(1.0));
  EXPECT_EQ(score_slope_pattern(up, std::nullopt, std::nan("")), -1.0);
}

TEST(Pattern, RangeFuzz) {
  std::mt19937_64 rng(1);
  std::cauchy_distribution<double> slope(0.0, 3.0);
  std::uniform_real_distribution<double> angle(-89.9, 89.9);
  for (int i = 0; i < 20000; ++i) {
    const double s = slope(rng);
    for (double v : {score_up(s), score_down(s), score_flat(s), score_theta(s, angle(rng))}) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_EQ(score_up(INFINITY), 1.0);
  EXPECT_EQ(score_flat(-INFINITY), -1.0);
}

TEST(Operators, Examples) {
  const std::vector<double> a{0.5, -0.5};
  const std::vector<double> b{0.8, 0.2};
  const std::vector<double> c{0.3};
  EXPECT_EQ(score_operator(NodeKind::Concat, a), 0.0);
  EXPECT_EQ(score_operator(NodeKind::And, b), 0.2);
  EXPECT_EQ(score_operator(NodeKind::Or, b), 0.8);
  EXPECT_EQ(score_operator(NodeKind::Not, c), -0.3);
  EXPECT_THROW(score_operator(NodeKind::Not, b), Error);
  EXPECT_THROW(score_operator(NodeKind::And, std::vector<double>{}), Error);
}

TEST(Operators, OutputsStayWithinChildren) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> s(1 + rng() % 6);
    for (auto& v : s) v = u(rng);
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    for (auto kind : {NodeKind::Concat, NodeKind::And, NodeKind::Or}) {
      const double o = score_operator(kind, s);
      EXPECT_GE(o, *lo - 1e-15);
      EXPECT_LE(o, *hi + 1e-15);
    }
  }
}

TEST(Quantifier, TwoRises) {
  const std::vector<double> ys{0, 1, 0, 1, 0};
  const auto viz = make_viz("v", ys);
  const double s = score_quantifier(viz, 0, 4, Pattern::up(), Quantifier{2, std::nullopt}, 0.0);
  EXPECT_GT(s, 0.0);
  EXPECT_NEAR(s, best_disjoint_mean(ys, 2), 1e-12);
  EXPECT_EQ(score_quantifier(viz, 0, 4, Pattern::up(), Quantifier{3, std::nullopt}, 0.0), -1.0);
  EXPECT_EQ(score_quantifier(viz, 0, 4, Pattern::up(), Quantifier{0, 1}, 0.0), -1.0);
}

TEST(Quantifier, Examples) {
  const std::vector<double> falling{5, 4, 3, 2, 1};
  const auto viz = make_viz("v", falling);
  EXPECT_EQ(score_quantifier(viz, 0, 4, Pattern::up(), Quantifier{1, std::nullopt}, 0.0), -1.0);
  EXPECT_GE(score_quantifier(viz, 0, 4, Pattern::up(), Quantifier{0, std::nullopt}, 0.0), 0.0);
}

TEST(Quantifier, VacuousNeverFailsAndMatchesBruteForce) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    const auto ys = oracle::random_series(rng, 3 + rng() % 6);
    const auto viz = make_viz("r", ys);
    const double vac = score_quantifier(viz, 0, ys.size() - 1, Pattern::up(), Quantifier{0, std::nullopt}, 0.0);
    EXPECT_GE(vac, 0.0);
    EXPECT_LE(vac, 1.0);
    // A single best window is what greedy selection picks first.
    const double one = score_quantifier(viz, 0, ys.size() - 1, Pattern::up(), Quantifier{1, std::nullopt}, 0.0);
    const double brute = best_disjoint_mean(ys, 1);
    if (brute > 0.0) {
      EXPECT_NEAR(one, brute, 1e-12);
    } else {
      EXPECT_EQ(one, -1.0);
    }
  }
}

TEST(Sketch, Distances) {
  const std::vector<double> a{0, 0, 1};
  const std::vector<double> b{0, 1, 1};
  EXPECT_DOUBLE_EQ(euclid_distance(a, b), 1.0);
  EXPECT_EQ(dtw_distance(a, b), 0.0);
  EXPECT_EQ(dtw_distance(a, b), oracle::dtw_bruteforce(a, b));
  EXPECT_THROW(euclid_distance(a, std::vector<double>{1}), Error);
  const std::vector<double> c{0, 5, 0, 0};
  const std::vector<double> d{0, 0, 5, 0};
  EXPECT_EQ(dtw_distance(c, d), 0.0);
  EXPECT_EQ(dtw_distance(c, d, 0), 10.0);
  EXPECT_EQ(dtw_distance(c, d, 1), 0.0);
}

TEST(Sketch, IdenticalScoresOne) {
  const std::vector<double> ys{1, 3, 2, 5};
  const auto viz = make_viz("v", ys);
  const std::vector<Point> sketch{{0, 1}, {1, 3}, {2, 2}, {3, 5}};
  const auto m = sketch_distance(sketch, viz, SketchMetric::Euclid);
  EXPECT_NEAR(m.distance, 0.0, 1e-12);
  const std::vector<double> raw{m.distance, 2.0, 1.0};
  const auto n = normalize_distances(raw);
  EXPECT_EQ(n[0], 1.0);
  EXPECT_EQ(n[1], -1.0);
  EXPECT_EQ(n[2], 0.0 + 1.0 - 2.0 * 0.5);
  EXPECT_EQ(normalize_distances(std::vector<double>{3.0, 3.0}), (std::vector<double>{1.0, 1.0}));
  EXPECT_THROW(sketch_distance(std::vector<Point>{{0, 1}}, viz, SketchMetric::Euclid), Error);
}

TEST(Sketch, NormalizationIsDecreasing) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<double> d(50);
  for (auto& v : d) v = u(rng);
  const auto n = normalize_distances(d);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (d[i] < d[j]) EXPECT_GT(n[i], n[j]);
    }
  }
}

TEST(Sketch, Resample) {
  const std::vector<Point> sk{{0, 0}, {2, 4}};
  EXPECT_EQ(resample_sketch(sk, std::vector<double>{-1, 1, 3}), (std::vector<double>{0, 2, 4}));
}

TEST(Segment, LocatedRise) {
  const std::vector<double> ys{0, 1, 2, 3, 4, 5, 6};
  const auto viz = make_viz("v", ys);
  ShapeSegment seg;
  seg.pattern = Pattern::up();
  seg.location.x_start = 2;
  seg.location.x_end = 5;
  const ScoreContext ctx{};
  EXPECT_NEAR(score_shape_segment(seg, 0, viz, 2, 5, ctx), 0.5, 1e-12);
  EXPECT_EQ(score_shape_segment(seg, 0, viz, 0, 3, ctx), -1.0);
}

TEST(Segment, PositionRelation) {
  const std::vector<double> ys{0, 0.5, 1.0, 1.5};
  const auto viz = make_viz("v", ys);
  ShapeSegment seg;
  PositionRef ref;
  ref.index = 0;
  seg.pattern = Pattern::position(ref);
  seg.modifier.comparator = Comparator::Less;
  LineFit first;
  first.slope = 2.0;
  const std::vector<std::optional<LineFit>> fits{first, std::nullopt};
  ScoreContext ctx;
  ctx.sibling_fits = fits;
  EXPECT_EQ(score_shape_segment(seg, 1, viz, 0, 3, ctx), 1.0);
  seg.modifier.comparator = Comparator::Greater;
  EXPECT_EQ(score_shape_segment(seg, 1, viz, 0, 3, ctx), -1.0);
  seg.modifier.comparator = Comparator::LessMuch;
  EXPECT_EQ(score_shape_segment(seg, 1, viz, 0, 3, ctx), 1.0);
}

TEST(Segment, IteratorAndTooSmall) {
  const std::vector<double> ys{0, 0, 0, 3, 3, 3};
  const auto viz = make_viz("v", ys);
  ShapeSegment seg;
  seg.pattern = Pattern::up();
  seg.location.iterator_width = 1;
  EXPECT_NEAR(score_shape_segment(seg, 0, viz, 0, 5, ScoreContext{}), score_up(3.0), 1e-12);
  seg.location.iterator_width = 8;
  EXPECT_EQ(score_shape_segment(seg, 0, viz, 0, 5, ScoreContext{}), -1.0);
  ShapeSegment plain;
  plain.pattern = Pattern::up();
  EXPECT_EQ(score_shape_segment(plain, 0, viz, 2, 2, ScoreContext{}), -1.0);
}

TEST(Udp, Registry) {
  register_udp("test_const", [](const VisualSegment& s) { return s.fit.slope > 0 ? 0.25 : 5.0; });
  ASSERT_TRUE(find_udp("test_const"));
  const std::vector<double> up{0, 1, 2};
  const std::vector<double> down{2, 1, 0};
  ShapeSegment seg;
  seg.pattern = Pattern::user_defined("test_const");
  EXPECT_EQ(score_shape_segment(seg, 0, make_viz("a", up), 0, 2, ScoreContext{}), 0.25);
  EXPECT_EQ(score_shape_segment(seg, 0, make_viz("b", down), 0, 2, ScoreContext{}), 1.0);
  EXPECT_TRUE(unregister_udp("test_const"));
  EXPECT_FALSE(unregister_udp("test_const"));
  EXPECT_EQ(score_shape_segment(seg, 0, make_viz("a", up), 0, 2, ScoreContext{}), -1.0);
}
