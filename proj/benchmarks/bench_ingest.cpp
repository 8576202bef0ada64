#include <benchmark/benchmark.h>

#include "trendseek/corpus.hpp"
#include "trendseek/ingest.hpp"

namespace ts = trendseek;

namespace {

ts::Dataset corpus(std::size_t count, std::size_t length) {
  ts::CorpusOptions opts;
  opts.count = count;
  opts.length = length;
  return ts::corpus_dataset(ts::random_walk_corpus(opts));
}

ts::VisualSpec spec() {
  ts::VisualSpec s;
  s.z_attr = "z";
  s.x_attr = "x";
  s.y_attr = "y";
  s.bin_width = 4.0;
  return s;
}

}  // namespace

static void BM_ExtractGroup(benchmark::State& state) {
  const auto ds = corpus(static_cast<std::size_t>(state.range(0)), 1000);
  const auto s = spec();
  for (auto _ : state) {
    const auto records = ts::extract(ds, s);
    benchmark::DoNotOptimize(ts::group_and_bin(records, s, true).vizs.size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 1000);
}
BENCHMARK(BM_ExtractGroup)->Arg(10)->Arg(100);

static void BM_ParseCsv(benchmark::State& state) {
  std::string csv = "z,x,y\n";
  for (int z = 0; z < 50; ++z) {
    for (int x = 0; x < 1000; ++x) csv += "s" + std::to_string(z) + "," + std::to_string(x) + ",1.5\n";
  }
  for (auto _ : state) benchmark::DoNotOptimize(ts::parse_csv(csv, "bench").row_count);
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(csv.size()));
}
BENCHMARK(BM_ParseCsv);
