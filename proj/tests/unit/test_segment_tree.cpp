#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "trendseek/corpus.hpp"
#include "trendseek/engines.hpp"
#include "trendseek/errors.hpp"
#include "trendseek/parser.hpp"

using namespace trendseek;

namespace {

CompiledQuery compile(const char* text) { return CompiledQuery(parse_shapequery(text)); }

}  // namespace

TEST(SegmentTree, PeakExample) {
  const std::vector<double> ys{0, 1, 2, 1, 0};
  const auto r = solve_segment_tree(compile("u >> d"), make_viz("v", ys));
  EXPECT_EQ(r.breakpoints, (std::vector<std::size_t>{0, 2, 4}));
  EXPECT_NEAR(r.total, 0.5, 1e-12);
}

TEST(SegmentTree, SingleExprCoversEverything) {
  const std::vector<double> ys{0, 2, 1, 3, 5};
  const auto r = solve_segment_tree(compile("u"), make_viz("v", ys));
  EXPECT_EQ(r.breakpoints, (std::vector<std::size_t>{0, 4}));
  EXPECT_NEAR(r.total, oracle::up(oracle::slope_of(ys, 0, 4)), 1e-12);
}

TEST(SegmentTree, StepsToRoot) {
  std::mt19937_64 rng(4);
  const auto viz = make_viz("r", oracle::random_series(rng, 100), true);
  const auto q = compile("u >> d >> u");
  SegmentTreeSolver solver(q, viz);
  EXPECT_EQ(solver.level(), 0u);
  std::size_t prev = solver.node_count();
  while (!solver.done()) {
    solver.advance();
    EXPECT_LT(solver.node_count(), prev);
    prev = solver.node_count();
  }
  EXPECT_EQ(solver.node_count(), 1u);
  EXPECT_GT(solver.merges(), 0u);
  const auto r = solver.finish();
  EXPECT_EQ(r.breakpoints.size(), 4u);
  EXPECT_EQ(r.total, solve_segment_tree(q, viz).total);
}

TEST(SegmentTree, BoundsContainFinalTotal) {
  std::mt19937_64 rng(5);
  const char* queries[] = {"u >> d >> u", "(u & f) >> d", "!d >> u", "[p=up,m={1,}] >> f"};
  for (int rep = 0; rep < 20; ++rep) {
    const auto viz = make_viz("r", oracle::random_series(rng, 60 + rng() % 40), true);
    for (const char* text : queries) {
      const auto q = compile(text);
      const double total = solve_segment_tree(q, viz).total;
      SegmentTreeSolver solver(q, viz);
      for (;;) {
        for (std::size_t limit : {0u, 32u}) {
          const auto b = solver.bounds(limit);
          EXPECT_LE(b.lower, total + 1e-9) << text << " level " << solver.level();
          EXPECT_GE(b.upper, total - 1e-9) << text << " level " << solver.level();
        }
        if (solver.done()) break;
        solver.advance();
      }
    }
  }
}

TEST(LevelBounds, UniformRise) {
  const std::vector<double> ys{0, 2, 4, 6, 8, 10, 12, 14};
  const auto viz = make_viz("v", ys);
  const auto q = compile("u");
  for (std::size_t level = 0; level < 3; ++level) {
    const auto b = level_bounds(q, viz, level, 0);
    EXPECT_NEAR(b.lower, oracle::up(2.0), 2e-9);
    EXPECT_NEAR(b.upper, oracle::up(2.0), 2e-9);
  }
}

TEST(LevelBounds, MixedSlopes) {
  const std::vector<double> ys{0, 1, 0, 1, 0};
  const auto viz = make_viz("v", ys);
  const auto up = level_bounds(compile("u"), viz, 0, 0);
  EXPECT_NEAR(up.lower, -0.5, 2e-9);
  EXPECT_NEAR(up.upper, 0.5, 2e-9);
  EXPECT_NEAR(level_bounds(compile("f"), viz, 0, 0).upper, 1.0, 2e-9);
}

TEST(SegmentTree, Infeasible) {
  const std::vector<double> ys{0, 1, 2};
  EXPECT_THROW(SegmentTreeSolver(compile("u >> d >> u"), make_viz("v", ys)), Error);
  std::string many = "u";
  for (int i = 0; i < 16; ++i) many += " >> d";
  std::mt19937_64 rng(1);
  const auto viz = make_viz("r", oracle::random_series(rng, 200));
  try {
    SegmentTreeSolver s(compile(many.c_str()), viz);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
}

TEST(SegmentTree, CloseToDpOnPlantedCorpus) {
  CorpusOptions opts;
  opts.count = 30;
  opts.length = 128;
  opts.seed = 3;
  const auto vizs = planted_corpus(opts, 3);
  const auto q = compile("u >> d >> u");
  double gap = 0.0;
  for (const auto& v : vizs) {
    const double dp = solve_dp(q, v).total;
    const double st = solve_segment_tree(q, v).total;
    EXPECT_LE(st, dp + 1e-12);
    gap += dp - st;
  }
  EXPECT_LT(gap / static_cast<double>(vizs.size()), 0.05);
}
