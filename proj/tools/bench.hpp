#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "trendseek/engines.hpp"

namespace trendseek::cli {

struct BenchRow {
  EngineKind engine = EngineKind::Dp;
  std::size_t viz_count = 0;
  std::size_t series_len = 0;
  std::size_t k = 0;  // ShapeExprs in the query
  double wall_ms = 0.0;
  double accuracy_vs_dp = 0.0;
};

inline constexpr std::size_t kBenchTrials = 6;

/// Runs each engine kBenchTrials times, drops the first trial and averages the
/// rest. Accuracy is the overlap of the engine's top-k ids with dp's.
std::vector<BenchRow> run_bench(const CompiledQuery& query, const std::vector<CandidateViz>& vizs,
                                const std::vector<EngineKind>& engines, std::size_t top_k,
                                const EngineConfig& base);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace trendseek::cli
