#include <benchmark/benchmark.h>

#include "trendseek/corpus.hpp"
#include "trendseek/engines.hpp"
#include "trendseek/parser.hpp"

namespace ts = trendseek;

namespace {

ts::CandidateViz planted(std::size_t length) {
  ts::CorpusOptions opts;
  opts.count = 1;
  opts.length = length;
  opts.seed = 1;
  return ts::planted_corpus(opts, 4).front();
}

template <ts::SegmentedViz (*Solve)(const ts::CompiledQuery&, const ts::CandidateViz&)>
void BM_Solve(benchmark::State& state) {
  const ts::CompiledQuery q(ts::parse_shapequery("u>>d>>u>>d"));
  const auto viz = planted(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Solve(q, viz).total);
  state.SetComplexityN(state.range(0));
}

void BM_Prune(benchmark::State& state) {
  const ts::CompiledQuery q(ts::parse_shapequery("u>>d>>u"));
  ts::CorpusOptions opts;
  opts.count = static_cast<std::size_t>(state.range(0));
  opts.length = 256;
  const auto vizs = ts::planted_corpus(opts, 3);
  ts::EngineConfig cfg;
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(ts::prune_run(q, vizs, 10, cfg).top.size());
}

void BM_Dtw(benchmark::State& state) {
  const auto a = planted(static_cast<std::size_t>(state.range(0)));
  const auto b = planted(static_cast<std::size_t>(state.range(0)) + 7);
  std::vector<double> ya, yb;
  for (const auto& bin : a.bins) ya.push_back(bin.y);
  for (const auto& bin : b.bins) yb.push_back(bin.y);
  for (auto _ : state) benchmark::DoNotOptimize(ts::dtw_distance(ya, yb));
}

}  // namespace

BENCHMARK(BM_Solve<ts::solve_dp>)->Name("dp")->RangeMultiplier(2)->Range(128, 1024)->Complexity();
BENCHMARK(BM_Solve<ts::solve_segment_tree>)->Name("segtree")->RangeMultiplier(2)->Range(128, 2048)->Complexity();
BENCHMARK(BM_Solve<ts::solve_greedy>)->Name("greedy")->RangeMultiplier(2)->Range(128, 2048);
BENCHMARK(BM_Prune)->Name("segtree_prune")->Arg(50)->Arg(200);
BENCHMARK(BM_Dtw)->Name("dtw")->Arg(128)->Arg(512);
BENCHMARK_MAIN();
