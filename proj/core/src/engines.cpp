#include "trendseek/engines.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>

#include "engine_detail.hpp"
#include "parallel.hpp"
#include "trendseek/errors.hpp"

namespace trendseek {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

EngineKind parse_engine(std::string_view name) {
  if (name == "exhaustive") return EngineKind::Exhaustive;
  if (name == "dp") return EngineKind::Dp;
  if (name == "segtree") return EngineKind::SegTree;
  if (name == "segtree_prune") return EngineKind::SegTreePrune;
  if (name == "greedy") return EngineKind::Greedy;
  if (name == "dtw") return EngineKind::Dtw;
  throw Error(ErrorCode::InvalidArgument,
              "unknown engine '" + std::string(name) +
                  "' (exhaustive, dp, segtree, segtree_prune, greedy, dtw)");
}

std::string_view to_string(EngineKind kind) noexcept {
  switch (kind) {
    case EngineKind::Exhaustive: return "exhaustive";
    case EngineKind::Dp: return "dp";
    case EngineKind::SegTree: return "segtree";
    case EngineKind::SegTreePrune: return "segtree_prune";
    case EngineKind::Greedy: return "greedy";
    case EngineKind::Dtw: return "dtw";
  }
  return "dp";
}

namespace detail {

void check_solvable(const CompiledQuery& query, const CandidateViz& viz) {
  if (query.has_sketch()) {
    throw Error(ErrorCode::InvalidArgument,
                "sketch queries are scored by distance, not by segmentation");
  }
  if (viz.size() < query.k() + 1) {
    throw Error(ErrorCode::InfeasibleSegmentation,
                "'" + viz.id + "' has " + std::to_string(viz.size()) + " bins; " +
                    std::to_string(query.k()) + " ShapeExprs need at least " +
                    std::to_string(query.k() + 1));
  }
}

double segmentation_sum(const CompiledQuery& query, const CandidateViz& viz,
                        std::span<const std::size_t> bps, SegmentedViz* out) {
  const std::size_t k = query.k();
  if (bps.size() != k + 1 || bps.front() != 0 || bps.back() + 1 != viz.size()) {
    throw Error(ErrorCode::InvalidArgument, "breakpoints must run from 0 to B-1 with k+1 entries");
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (bps[j + 1] <= bps[j]) {
      throw Error(ErrorCode::InvalidArgument, "breakpoints must be strictly increasing");
    }
  }
  std::vector<SummarizedStats> stats(k);
  std::vector<std::optional<LineFit>> fits(k);
  for (std::size_t j = 0; j < k; ++j) {
    SummarizedStats s = viz.bins[bps[j]].stats;
    for (std::size_t t = bps[j] + 1; t <= bps[j + 1]; ++t) s += viz.bins[t].stats;
    stats[j] = s;
    fits[j] = try_fit_line(s);
    if (fits[j]) {
      fits[j]->x_start = bps[j];
      fits[j]->x_end = bps[j + 1];
    }
  }
  std::vector<std::optional<LineFit>> siblings;
  if (query.has_cross_refs()) {
    siblings.resize(query.segment_count());
    for (std::size_t s = 0; s < siblings.size(); ++s) siblings[s] = fits[query.expr_of_segment(s)];
  }
  std::vector<double> scores(k);
  for (std::size_t j = 0; j < k; ++j) {
    scores[j] = query.score_expr_fitted(j, viz, bps[j], bps[j + 1], fits[j] ? &*fits[j] : nullptr,
                                        siblings);
  }
  double sum = scores[k - 1];
  for (std::size_t j = k - 1; j-- > 0;) sum = scores[j] + sum;
  if (out) {
    out->breakpoints.assign(bps.begin(), bps.end());
    out->expr_scores = scores;
    out->total = sum / static_cast<double>(k);
    out->fits.clear();
    for (std::size_t j = 0; j < k; ++j) {
      LineFit f;
      if (fits[j]) {
        f = *fits[j];
      } else {
        f.n_points = stats[j].n;
        f.x_start = bps[j];
        f.x_end = bps[j + 1];
        f.intercept = stats[j].n ? stats[j].sum_y / static_cast<double>(stats[j].n) : 0.0;
      }
      out->fits.push_back(f);
    }
  }
  return sum;
}

}  // namespace detail

SegmentedViz evaluate_segmentation(const CompiledQuery& query, const CandidateViz& viz,
                                   std::span<const std::size_t> breakpoints) {
  SegmentedViz out;
  detail::segmentation_sum(query, viz, breakpoints, &out);
  return out;
}

SegmentedViz enumerate_exhaustive(const CompiledQuery& query, const CandidateViz& viz) {
  const std::size_t k = query.k();
  const std::size_t B = viz.size();
  if (B > kExhaustiveMaxBins || k > kExhaustiveMaxExprs) {
    throw Error(ErrorCode::TooLarge, "exhaustive enumeration is limited to " +
                                         std::to_string(kExhaustiveMaxBins) + " bins and " +
                                         std::to_string(kExhaustiveMaxExprs) + " ShapeExprs");
  }
  detail::check_solvable(query, viz);
  const auto pins = query.pins(viz);
  std::vector<std::size_t> bps(k + 1);
  for (std::size_t j = 0; j <= k; ++j) bps[j] = j;
  bps[k] = B - 1;
  std::vector<std::size_t> best;
  double best_sum = kNegInf;
  // Lexicographic walk over strictly increasing interior breakpoints.
  for (;;) {
    bool ok = true;
    for (std::size_t j = 1; j < k; ++j) {
      if (pins[j] && *pins[j] != bps[j]) {
        ok = false;
        break;
      }
    }
    if (ok) {
      const double s = detail::segmentation_sum(query, viz, bps, nullptr);
      if (s > best_sum || best.empty()) {
        if (best.empty() || s > best_sum) {
          best_sum = s;
          best = bps;
        }
      }
    }
    std::size_t j = k - 1;
    while (j >= 1 && bps[j] == B - 1 - (k - j)) --j;
    if (j == 0) break;
    ++bps[j];
    for (std::size_t t = j + 1; t < k; ++t) bps[t] = bps[t - 1] + 1;
  }
  if (best.empty()) {
    throw Error(ErrorCode::InfeasibleSegmentation, "no segmentation satisfies the pinned locations");
  }
  return evaluate_segmentation(query, viz, best);
}

DpTable dp_table(const CompiledQuery& query, const CandidateViz& viz) {
  detail::check_solvable(query, viz);
  const std::size_t k = query.k();
  const std::size_t B = viz.size();
  const auto pins = query.pins(viz);
  DpTable t;
  t.k = k;
  t.bins = B;
  t.best.assign(k * B, kNegInf);
  t.choice.assign(k * B, 0);
  for (std::size_t i = B - 1; i-- > 0;) {
    // Exprs that may start at bin i.
    std::size_t j_lo = i == 0 ? 0 : 1;
    std::size_t j_hi = std::min(k - 1, i);
    SummarizedStats s = viz.bins[i].stats;
    for (std::size_t l = i + 1; l < B; ++l) {
      s += viz.bins[l].stats;
      auto fit = try_fit_line(s);
      if (fit) {
        fit->x_start = i;
        fit->x_end = l;
      }
      for (std::size_t j = j_lo; j <= j_hi; ++j) {
        if (j > 0 && pins[j] && *pins[j] != i) continue;
        double rest = 0.0;
        if (j + 1 == k) {
          if (l != B - 1) continue;
        } else {
          if (l == B - 1) continue;
          rest = t.best[(j + 1) * B + l];
          if (rest == kNegInf) continue;
        }
        const double sc = query.score_expr_fitted(j, viz, i, l, fit ? &*fit : nullptr);
        const double cand = j + 1 == k ? sc : sc + rest;
        double& cell = t.best[j * B + i];
        if (cand > cell) {
          cell = cand;
          t.choice[j * B + i] = l;
        }
      }
    }
  }
  return t;
}

SegmentedViz solve_dp(const CompiledQuery& query, const CandidateViz& viz) {
  const DpTable t = dp_table(query, viz);
  if (t.at(0, 0) == kNegInf) {
    throw Error(ErrorCode::InfeasibleSegmentation, "no segmentation satisfies the pinned locations");
  }
  std::vector<std::size_t> bps(t.k + 1, 0);
  std::size_t i = 0;
  for (std::size_t j = 0; j < t.k; ++j) {
    i = t.end_of(j, i);
    bps[j + 1] = i;
  }
  return evaluate_segmentation(query, viz, bps);
}

std::vector<std::size_t> equal_breakpoints(const CompiledQuery& query, const CandidateViz& viz) {
  detail::check_solvable(query, viz);
  const std::size_t k = query.k();
  const std::size_t B = viz.size();
  const auto pins = query.pins(viz);
  std::vector<std::size_t> anchors{0};
  for (std::size_t j = 1; j < k; ++j) {
    if (pins[j]) anchors.push_back(j);
  }
  anchors.push_back(k);
  std::vector<std::size_t> bps(k + 1, 0);
  bps[k] = B - 1;
  for (std::size_t j = 1; j < k; ++j) {
    if (pins[j]) bps[j] = *pins[j];
  }
  for (std::size_t a = 0; a + 1 < anchors.size(); ++a) {
    const std::size_t j1 = anchors[a];
    const std::size_t j2 = anchors[a + 1];
    const std::size_t p1 = bps[j1];
    const std::size_t p2 = bps[j2];
    if (p2 < p1 || p2 - p1 < j2 - j1) {
      throw Error(ErrorCode::InfeasibleSegmentation,
                  "pinned locations leave no room for the ShapeExprs between them");
    }
    for (std::size_t j = j1 + 1; j < j2; ++j) bps[j] = p1 + (j - j1) * (p2 - p1) / (j2 - j1);
  }
  return bps;
}

SegmentedViz solve_greedy(const CompiledQuery& query, const CandidateViz& viz) {
  std::vector<std::size_t> bps = equal_breakpoints(query, viz);
  const auto pins = query.pins(viz);
  const std::size_t k = query.k();
  double current = detail::segmentation_sum(query, viz, bps, nullptr);
  for (std::size_t iter = 0; iter < 100000; ++iter) {
    double best = current;
    std::size_t best_j = 0;
    std::size_t best_pos = 0;
    for (std::size_t j = 1; j < k; ++j) {
      if (pins[j]) continue;
      const std::size_t left_gap = bps[j] - bps[j - 1];
      const std::size_t right_gap = bps[j + 1] - bps[j];
      const std::size_t moves[2] = {bps[j] - left_gap / 2, bps[j] + right_gap / 2};
      for (std::size_t pos : moves) {
        if (pos == bps[j]) continue;
        const std::size_t old = bps[j];
        bps[j] = pos;
        const double s = detail::segmentation_sum(query, viz, bps, nullptr);
        bps[j] = old;
        if (s > best) {
          best = s;
          best_j = j;
          best_pos = pos;
        }
      }
    }
    if (best_j == 0) break;
    bps[best_j] = best_pos;
    current = best;
  }
  return evaluate_segmentation(query, viz, bps);
}

namespace {

double characteristic_slope(const ShapeQuery& q) {
  switch (q.kind) {
    case NodeKind::Segment: {
      const Pattern& p = q.segment.pattern;
      switch (p.kind) {
        case PatternKind::Up: return 1.0;
        case PatternKind::Down: return -1.0;
        case PatternKind::Theta: return std::tan(p.angle_deg * std::numbers::pi / 180.0);
        default: return 0.0;
      }
    }
    case NodeKind::Not: return -characteristic_slope(q.children[0]);
    case NodeKind::And:
    case NodeKind::Or: return characteristic_slope(q.children[0]);
    case NodeKind::Concat: return 0.0;
  }
  return 0.0;
}

}  // namespace

std::vector<double> dtw_template(const CompiledQuery& query, std::size_t length) {
  const auto exprs = shape_exprs(query.ast());
  const std::size_t k = exprs.size();
  std::vector<double> out(length, 0.0);
  if (length == 0) return out;
  double y = 0.0;
  for (std::size_t i = 1; i < length; ++i) {
    const std::size_t j = std::min(k - 1, (i - 1) * k / std::max<std::size_t>(length - 1, 1));
    y += characteristic_slope(*exprs[j]);
    out[i] = y;
  }
  zscore(out);
  return out;
}

double dtw_template_distance(const CompiledQuery& query, const CandidateViz& viz) {
  std::vector<double> ys(viz.size());
  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = viz.bins[i].y;
  zscore(ys);
  const auto tmpl = dtw_template(query, ys.size());
  const std::size_t band = std::max<std::size_t>(1, ys.size() / 10);
  return dtw_distance(ys, tmpl, band);
}

SegmentedViz enumerate_exhaustive(const ShapeQuery& ast, const CandidateViz& viz) {
  return enumerate_exhaustive(CompiledQuery(ast), viz);
}
SegmentedViz solve_dp(const ShapeQuery& ast, const CandidateViz& viz) {
  return solve_dp(CompiledQuery(ast), viz);
}
SegmentedViz solve_segment_tree(const ShapeQuery& ast, const CandidateViz& viz) {
  return solve_segment_tree(CompiledQuery(ast), viz);
}
SegmentedViz solve_greedy(const ShapeQuery& ast, const CandidateViz& viz) {
  return solve_greedy(CompiledQuery(ast), viz);
}

SegmentedViz solve_one(const CompiledQuery& query, const CandidateViz& viz, EngineKind engine) {
  switch (engine) {
    case EngineKind::Exhaustive: return enumerate_exhaustive(query, viz);
    case EngineKind::Dp: return solve_dp(query, viz);
    case EngineKind::SegTree:
    case EngineKind::SegTreePrune: return solve_segment_tree(query, viz);
    case EngineKind::Greedy: return solve_greedy(query, viz);
    case EngineKind::Dtw: {
      SegmentedViz out = evaluate_segmentation(query, viz, equal_breakpoints(query, viz));
      out.total = -dtw_template_distance(query, viz);
      return out;
    }
  }
  return solve_dp(query, viz);
}

bool ranks_before(const RankedViz& a, const RankedViz& b) noexcept {
  if (a.result.total != b.result.total) return a.result.total > b.result.total;
  if (a.id != b.id) return a.id < b.id;
  return a.index < b.index;
}

EngineRun rank_vizs(const CompiledQuery& query, std::span<const CandidateViz> vizs, std::size_t k,
                    const EngineConfig& config) {
  if (config.engine == EngineKind::SegTreePrune) return prune_run(query, vizs, k, config);
  std::vector<std::optional<SegmentedViz>> results(vizs.size());
  std::vector<double> distances(vizs.size(), 0.0);
  std::vector<std::string> errors(vizs.size());
  std::atomic<std::size_t> infeasible{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  detail::parallel_for(vizs.size(), config.threads, [&](std::size_t i) {
    try {
      if (config.engine == EngineKind::Dtw) {
        SegmentedViz seg = evaluate_segmentation(query, vizs[i], equal_breakpoints(query, vizs[i]));
        distances[i] = dtw_template_distance(query, vizs[i]);
        results[i] = std::move(seg);
      } else {
        results[i] = solve_one(query, vizs[i], config.engine);
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::TooLarge || e.code() == ErrorCode::InvalidArgument) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
      } else {
        if (e.code() == ErrorCode::InfeasibleSegmentation) infeasible.fetch_add(1);
        errors[i] = "skipped '" + vizs[i].id + "': " + e.what();
      }
    } catch (...) {
      std::lock_guard lock(fatal_mutex);
      if (!fatal) fatal = std::current_exception();
    }
  });
  if (fatal) std::rethrow_exception(fatal);

  EngineRun run;
  if (config.engine == EngineKind::Dtw) {
    std::vector<double> present;
    for (std::size_t i = 0; i < vizs.size(); ++i) {
      if (results[i]) present.push_back(distances[i]);
    }
    if (!present.empty()) {
      const auto [mn, mx] = std::minmax_element(present.begin(), present.end());
      for (std::size_t i = 0; i < vizs.size(); ++i) {
        if (!results[i]) continue;
        const double s = normalize_distance(distances[i], *mn, *mx);
        results[i]->total = s;
        std::fill(results[i]->expr_scores.begin(), results[i]->expr_scores.end(), s);
      }
    }
  }
  for (std::size_t i = 0; i < vizs.size(); ++i) {
    if (!errors[i].empty()) run.warnings.push_back(errors[i]);
    if (results[i]) run.top.push_back({i, vizs[i].id, std::move(*results[i])});
  }
  std::sort(run.top.begin(), run.top.end(), ranks_before);
  if (run.top.size() > k) run.top.resize(k);
  run.infeasible = infeasible.load();
  run.prune.vizs = vizs.size();
  run.prune.reached_root = vizs.size();
  return run;
}

}  // namespace trendseek
