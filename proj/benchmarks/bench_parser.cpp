#include <benchmark/benchmark.h>

#include "trendseek/parser.hpp"

namespace ts = trendseek;

static void BM_ParseShort(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(ts::parse_shapequery("u >> d >> u"));
}
BENCHMARK(BM_ParseShort);

static void BM_ParseLong(benchmark::State& state) {
  std::string text = "[p=up,x.s=0,x.e=10,m={2,}]";
  for (int i = 0; i < 15; ++i) text += " >> ([p=down] | [p=30] & !f)";
  for (auto _ : state) benchmark::DoNotOptimize(ts::parse_shapequery(text));
}
BENCHMARK(BM_ParseLong);

static void BM_FormatRoundTrip(benchmark::State& state) {
  const auto ast = ts::parse_shapequery("u >> (f | (u >> d)) >> [p=$0,m=<0.5]");
  for (auto _ : state) benchmark::DoNotOptimize(ts::parse_shapequery(ts::format_shapequery(ast)));
}
BENCHMARK(BM_FormatRoundTrip);
