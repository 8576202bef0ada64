#include "trendseek/executor.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "trendseek/compiled.hpp"
#include "trendseek/errors.hpp"
#include "trendseek/scoring.hpp"

namespace trendseek {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

struct Prepared {
  CandidateViz viz;
  double mean = 0.0;
  double sd = 1.0;
  bool normalized = false;
};

std::vector<RankedViz> rank_sketch(const CompiledQuery& query, std::span<const CandidateViz> vizs,
                                   std::size_t k, const EngineConfig& config,
                                   std::vector<std::string>& warnings) {
  const auto& sketch = query.segment(0).pattern.sketch;
  const SketchMetric metric =
      config.engine == EngineKind::Dtw ? SketchMetric::Dtw : SketchMetric::Euclid;
  std::vector<std::size_t> kept;
  std::vector<double> distances;
  for (std::size_t i = 0; i < vizs.size(); ++i) {
    try {
      distances.push_back(sketch_distance(sketch, vizs[i], metric).distance);
      kept.push_back(i);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EmptySketch) throw;
      warnings.push_back("skipped '" + vizs[i].id + "': " + e.what());
    }
  }
  const auto scores = normalize_distances(distances);
  std::vector<RankedViz> out;
  for (std::size_t n = 0; n < kept.size(); ++n) {
    const CandidateViz& viz = vizs[kept[n]];
    SegmentedViz seg;
    seg.breakpoints = {0, viz.size() - 1};
    seg.expr_scores = {scores[n]};
    seg.total = scores[n];
    SummarizedStats all;
    for (const auto& b : viz.bins) all += b.stats;
    if (auto fit = try_fit_line(all)) {
      fit->x_start = 0;
      fit->x_end = viz.size() - 1;
      seg.fits = {*fit};
    }
    out.push_back({kept[n], viz.id, std::move(seg)});
  }
  std::sort(out.begin(), out.end(), ranks_before);
  if (out.size() > k) out.resize(k);
  return out;
}

std::size_t full_index(const CandidateViz& full, std::size_t grid) {
  const auto it = std::lower_bound(full.bins.begin(), full.bins.end(), grid,
                                   [](const Bin& b, std::size_t g) { return b.grid < g; });
  return static_cast<std::size_t>(it - full.bins.begin());
}

}  // namespace

QueryOutput run_query(const Dataset& dataset, const VisualSpec& spec, const ShapeQuery& ast,
                      std::size_t k, const EngineConfig& config, const ExecuteOptions& options) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  const auto start = Clock::now();
  QueryOutput out;
  ScoreOptions score_options;
  score_options.quantifier_threshold = config.quantifier_threshold;
  const CompiledQuery query(ast, score_options);
  out.plan = pushdown_plan(ast, spec);
  dataset.column(spec.z_attr);
  dataset.column(spec.y_attr);
  out.x_is_date = dataset.column(spec.x_attr).kind == ColumnKind::Date;

  auto phase = Clock::now();
  const auto grid = bin_grid_for(dataset, spec);
  if (!grid) {
    out.warnings.push_back("no records pass the filters");
    out.timing_ms["total"] = elapsed_ms(start);
    return out;
  }
  std::span<const XRange> ranges;
  if (options.use_plan) ranges = out.plan.ranges;
  const auto records = extract(dataset, spec, ranges, grid->width);
  out.timing_ms["extract"] = elapsed_ms(phase);

  phase = Clock::now();
  const bool normalize = !has_y_constraints(ast);
  GroupResult groups = group_and_bin(records, spec, false, grid);
  out.warnings = std::move(groups.warnings);
  out.stats.vizs = groups.vizs.size();
  for (const auto& viz : groups.vizs) {
    out.stats.bins_materialized += viz.size();
    for (const auto& b : viz.bins) {
      out.stats.min_materialized_x = std::min(out.stats.min_materialized_x.value_or(b.x), b.x);
      out.stats.max_materialized_x = std::max(out.stats.max_materialized_x.value_or(b.x), b.x);
    }
  }

  std::vector<Prepared> prepared;
  for (const auto& viz : groups.vizs) {
    const auto range = bins_within(viz, out.plan.domain_lo, out.plan.domain_hi);
    if (!range || range->first == range->second) {
      out.warnings.push_back("skipped '" + viz.id + "': fewer than two bins inside the query range");
      continue;
    }
    Prepared p;
    p.viz = slice_viz(viz, range->first, range->second);
    if (normalize) {
      std::vector<double> ys(p.viz.size());
      for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = p.viz.y(i);
      std::tie(p.mean, p.sd) = zscore(ys);
      p.normalized = true;
      reindex(p.viz, true);
    }
    if (config.eager_pushdown) {
      bool drop = false;
      for (const auto& check : out.plan.eager_checks) {
        const auto s = eager_score(check, p.viz);
        if (s && *s < 0.0) drop = true;
      }
      if (drop) {
        ++out.stats.eager_dropped;
        continue;
      }
    }
    prepared.push_back(std::move(p));
  }
  std::vector<CandidateViz> vizs;
  vizs.reserve(prepared.size());
  for (auto& p : prepared) vizs.push_back(std::move(p.viz));
  out.timing_ms["group"] = elapsed_ms(phase);

  phase = Clock::now();
  std::vector<RankedViz> top;
  if (query.has_sketch()) {
    top = rank_sketch(query, vizs, k, config, out.warnings);
    out.stats.prune.vizs = out.stats.prune.reached_root = vizs.size();
  } else {
    EngineRun run = rank_vizs(query, vizs, k, config);
    if (run.top.empty() && !vizs.empty() && run.infeasible == vizs.size()) {
      throw Error(ErrorCode::InfeasibleSegmentation,
                  "no candidate admits a segmentation that satisfies the query's locations");
    }
    out.warnings.insert(out.warnings.end(), run.warnings.begin(), run.warnings.end());
    out.stats.prune = run.prune;
    top = std::move(run.top);
  }
  out.timing_ms["solve"] = elapsed_ms(phase);

  phase = Clock::now();
  std::vector<CandidateViz> full;
  if (options.use_plan && out.plan.restricts() && !top.empty()) {
    std::set<std::string, std::less<>> winners;
    for (const auto& r : top) winners.insert(r.id);
    std::vector<Record> all = extract(dataset, spec);
    std::erase_if(all, [&](const Record& r) { return !winners.count(r.z); });
    full = group_and_bin(all, spec, false, grid).vizs;
  } else {
    full = std::move(groups.vizs);
  }
  for (const auto& r : top) {
    const Prepared& p = prepared[r.index];
    const CandidateViz& solved = vizs[r.index];
    const auto it = std::find_if(full.begin(), full.end(),
                                 [&](const CandidateViz& v) { return v.id == r.id; });
    if (it == full.end()) continue;
    const CandidateViz& series = *it;
    RankedResult res;
    res.viz_id = r.id;
    res.total = r.result.total;
    res.expr_scores = r.result.expr_scores;
    res.fits = r.result.fits;
    res.series.reserve(series.size());
    for (const auto& b : series.bins) {
      double y = b.y;
      if (p.normalized) y = p.sd > 0.0 ? (y - p.mean) / p.sd : 0.0;
      res.series.push_back({b.x, y});
    }
    for (std::size_t bp : r.result.breakpoints) {
      const std::size_t idx = full_index(series, solved.bins[bp].grid);
      res.breakpoints.push_back(idx);
      res.breakpoint_x.push_back(series.bins[std::min(idx, series.size() - 1)].x);
    }
    if (res.fits.size() + 1 == r.result.breakpoints.size()) {
      for (std::size_t j = 0; j < res.fits.size(); ++j) {
        const std::size_t a = r.result.breakpoints[j];
        const std::size_t b = r.result.breakpoints[j + 1];
        res.segments.push_back({Point{solved.bins[a].x, res.fits[j].at(static_cast<double>(a))},
                                Point{solved.bins[b].x, res.fits[j].at(static_cast<double>(b))}});
      }
    }
    out.results.push_back(std::move(res));
  }
  out.timing_ms["render"] = elapsed_ms(phase);
  out.timing_ms["total"] = elapsed_ms(start);
  return out;
}

}  // namespace trendseek
