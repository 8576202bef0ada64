#include "bench.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <sstream>

namespace trendseek::cli {

std::vector<BenchRow> run_bench(const CompiledQuery& query, const std::vector<CandidateViz>& vizs,
                                const std::vector<EngineKind>& engines, std::size_t top_k,
                                const EngineConfig& base) {
  auto ids_of = [](const EngineRun& run) {
    std::set<std::string> ids;
    for (const auto& r : run.top) ids.insert(r.id);
    return ids;
  };
  EngineConfig dp_config = base;
  dp_config.engine = EngineKind::Dp;
  const auto reference = ids_of(rank_vizs(query, vizs, top_k, dp_config));
  const std::size_t series_len = vizs.empty() ? 0 : vizs.front().size();

  std::vector<BenchRow> rows;
  for (EngineKind engine : engines) {
    EngineConfig config = base;
    config.engine = engine;
    double total_ms = 0.0;
    EngineRun last;
    for (std::size_t trial = 0; trial < kBenchTrials; ++trial) {
      const auto start = std::chrono::steady_clock::now();
      last = rank_vizs(query, vizs, top_k, config);
      const double ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
              .count();
      if (trial > 0) total_ms += ms;
    }
    const auto ids = ids_of(last);
    std::size_t common = 0;
    for (const auto& id : ids) common += reference.count(id);
    const std::size_t denom = std::min(top_k, vizs.size());
    BenchRow row;
    row.engine = engine;
    row.viz_count = vizs.size();
    row.series_len = series_len;
    row.k = query.k();
    row.wall_ms = total_ms / static_cast<double>(kBenchTrials - 1);
    row.accuracy_vs_dp = denom ? static_cast<double>(common) / static_cast<double>(denom) : 1.0;
    rows.push_back(row);
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "engine,viz_count,series_len,k,wall_ms,accuracy_vs_dp\n";
  out.setf(std::ios::fixed);
  for (const auto& r : rows) {
    out.precision(3);
    out << to_string(r.engine) << ',' << r.viz_count << ',' << r.series_len << ',' << r.k << ','
        << r.wall_ms << ',';
    out.precision(4);
    out << r.accuracy_vs_dp << '\n';
  }
  return out.str();
}

}  // namespace trendseek::cli
