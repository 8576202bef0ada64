#include <gtest/gtest.h>

#include "trendseek/corpus.hpp"
#include "trendseek/engines.hpp"
#include "trendseek/parser.hpp"

using namespace trendseek;

namespace {

CompiledQuery compile(const char* text) { return CompiledQuery(parse_shapequery(text)); }

EngineConfig config(EngineKind engine, std::size_t threads) {
  EngineConfig c;
  c.engine = engine;
  c.threads = threads;
  return c;
}

void expect_same(const EngineRun& a, const EngineRun& b) {
  ASSERT_EQ(a.top.size(), b.top.size());
  for (std::size_t i = 0; i < a.top.size(); ++i) {
    EXPECT_EQ(a.top[i].id, b.top[i].id) << "rank " << i;
    EXPECT_EQ(a.top[i].result.total, b.top[i].result.total) << "rank " << i;
    EXPECT_EQ(a.top[i].result.breakpoints, b.top[i].result.breakpoints) << "rank " << i;
  }
}

}  // namespace

TEST(Prune, MatchesUnprunedSegmentTree) {
  CorpusOptions opts;
  opts.count = 60;
  opts.length = 96;
  for (std::uint64_t seed : {0u, 1u}) {
    opts.seed = seed;
    for (const auto& vizs : {random_walk_corpus(opts), planted_corpus(opts, 3)}) {
      for (const char* text : {"u >> d >> u", "d >> u"}) {
        const auto q = compile(text);
        for (std::size_t k : {1u, 5u}) {
          const auto full = rank_vizs(q, vizs, k, config(EngineKind::SegTree, 1));
          const auto pruned = prune_run(q, vizs, k, config(EngineKind::SegTreePrune, 1));
          expect_same(full, pruned);
          EXPECT_EQ(pruned.prune.vizs, vizs.size());
          EXPECT_LE(pruned.prune.reached_root, vizs.size());
          EXPECT_GE(pruned.prune.reached_root, k);
        }
      }
    }
  }
}

TEST(Prune, DeterministicAcrossThreads) {
  CorpusOptions opts;
  opts.count = 50;
  opts.length = 80;
  opts.seed = 11;
  const auto vizs = planted_corpus(opts, 2);
  const auto q = compile("u >> d");
  const auto one = prune_run(q, vizs, 5, config(EngineKind::SegTreePrune, 1));
  const auto four = prune_run(q, vizs, 5, config(EngineKind::SegTreePrune, 4));
  expect_same(one, four);
}

TEST(Prune, NeedleIsFoundAndMostVizsDropped) {
  CorpusOptions opts;
  opts.count = 100;
  opts.length = 128;
  opts.noise = 0.005;
  opts.seed = 7;
  const auto vizs = needle_corpus(opts);
  const auto run = prune_run(compile("u >> d >> u"), vizs, 1, config(EngineKind::SegTreePrune, 1));
  ASSERT_EQ(run.top.size(), 1u);
  EXPECT_EQ(run.top[0].id, "needle");
  EXPECT_LE(run.prune.reached_root * 2, vizs.size());
}

TEST(Prune, KLargerThanCorpus) {
  CorpusOptions opts;
  opts.count = 4;
  opts.length = 40;
  const auto vizs = random_walk_corpus(opts);
  const auto run = prune_run(compile("u >> d"), vizs, 10, config(EngineKind::SegTreePrune, 1));
  EXPECT_EQ(run.top.size(), 4u);
  for (std::size_t i = 1; i < run.top.size(); ++i) {
    EXPECT_TRUE(ranks_before(run.top[i - 1], run.top[i]));
  }
}

TEST(Prune, ShortVizsAreSkippedWithWarning) {
  CorpusOptions opts;
  opts.count = 6;
  opts.length = 40;
  auto vizs = random_walk_corpus(opts);
  const std::vector<double> tiny{0, 1};
  vizs.push_back(make_viz("tiny", tiny));
  const auto run = prune_run(compile("u >> d >> u"), vizs, 3, config(EngineKind::SegTreePrune, 1));
  EXPECT_EQ(run.infeasible, 1u);
  EXPECT_FALSE(run.warnings.empty());
  EXPECT_EQ(run.top.size(), 3u);
}
