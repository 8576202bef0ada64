#include "trendseek/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>

#include "segment_eval.hpp"
#include "trendseek/compiled.hpp"
#include "trendseek/engines.hpp"
#include "trendseek/errors.hpp"

namespace trendseek {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSharpDeg = 67.5;
constexpr double kGentleDeg = 22.5;

}  // namespace

double score_up(double slope) noexcept { return clamp_score(2.0 * std::atan(slope) / kPi); }

double score_down(double slope) noexcept { return clamp_score(-2.0 * std::atan(slope) / kPi); }

double score_flat(double slope) noexcept {
  return clamp_score(1.0 - std::abs(4.0 * std::atan(slope) / kPi));
}

double score_theta(double slope, double angle_deg) noexcept {
  const double x = angle_deg * kPi / 180.0;
  return clamp_score(1.0 - 2.0 * std::abs(std::atan(slope) - x) / (kPi / 2.0 + std::abs(x)));
}

double score_slope_pattern(const Pattern& p, const std::optional<Comparator>& sharpness,
                           double slope) noexcept {
  if (std::isnan(slope)) return -1.0;
  switch (p.kind) {
    case PatternKind::Up:
    case PatternKind::Down: {
      const double sign = p.kind == PatternKind::Up ? 1.0 : -1.0;
      if (sharpness) {
        switch (*sharpness) {
          case Comparator::Greater:
          case Comparator::GreaterMuch:
            return score_theta(slope, sign * kSharpDeg);
          case Comparator::Less:
          case Comparator::LessMuch:
            return score_theta(slope, sign * kGentleDeg);
          case Comparator::Equal:
            break;
        }
      }
      return p.kind == PatternKind::Up ? score_up(slope) : score_down(slope);
    }
    case PatternKind::Flat: return score_flat(slope);
    case PatternKind::Theta: return score_theta(slope, p.angle_deg);
    case PatternKind::Any: return 1.0;
    case PatternKind::Empty: return -1.0;
    default: return -1.0;
  }
}

double score_pattern(const Pattern& pattern, const LineFit& fit) {
  switch (pattern.kind) {
    case PatternKind::Up:
    case PatternKind::Down:
    case PatternKind::Flat:
    case PatternKind::Theta:
    case PatternKind::Any:
    case PatternKind::Empty:
      return score_slope_pattern(pattern, std::nullopt, fit.slope);
    default:
      throw Error(ErrorCode::InvalidArgument,
                  "score_pattern only handles up, down, flat, slope, any and empty");
  }
}

double score_operator(NodeKind kind, std::span<const double> s) {
  if (s.empty()) throw Error(ErrorCode::InvalidArgument, "operator needs operands");
  switch (kind) {
    case NodeKind::Concat: {
      double sum = 0.0;
      for (double v : s) sum += v;
      return sum / static_cast<double>(s.size());
    }
    case NodeKind::And: return *std::min_element(s.begin(), s.end());
    case NodeKind::Or: return *std::max_element(s.begin(), s.end());
    case NodeKind::Not:
      if (s.size() != 1) throw Error(ErrorCode::InvalidArgument, "NOT takes one operand");
      return -s[0];
    case NodeKind::Segment: break;
  }
  throw Error(ErrorCode::InvalidArgument, "not an operator");
}

double score_quantifier(const CandidateViz& viz, std::size_t first, std::size_t last,
                        const Pattern& pattern, const Quantifier& q, double threshold,
                        const std::optional<Comparator>& sharpness) {
  if (last <= first || last >= viz.size()) return -1.0;
  const std::size_t len = last - first + 1;
  std::vector<SummarizedStats> prefix(len + 1);
  for (std::size_t i = 0; i < len; ++i) {
    prefix[i + 1] = merge_stats(prefix[i], viz.bins[first + i].stats);
  }
  struct Window {
    double score;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Window> windows;
  for (std::size_t i = 0; i + 1 < len; ++i) {
    for (std::size_t j = i + 1; j < len; ++j) {
      SummarizedStats s = prefix[j + 1];
      s.n -= prefix[i].n;
      s.sum_x -= prefix[i].sum_x;
      s.sum_y -= prefix[i].sum_y;
      s.sum_xy -= prefix[i].sum_xy;
      s.sum_xx -= prefix[i].sum_xx;
      const double sc = score_slope_pattern(pattern, sharpness, fit_slope(s));
      if (sc > threshold) windows.push_back({sc, i, j});
    }
  }
  std::sort(windows.begin(), windows.end(), [](const Window& a, const Window& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  std::vector<char> used(len, 0);  // step t covers bins t..t+1
  std::vector<double> picked;
  for (const auto& w : windows) {
    bool free = true;
    for (std::size_t t = w.i; t < w.j; ++t) {
      if (used[t]) {
        free = false;
        break;
      }
    }
    if (!free) continue;
    for (std::size_t t = w.i; t < w.j; ++t) used[t] = 1;
    picked.push_back(w.score);
    if (q.max && picked.size() > *q.max) return -1.0;
  }
  if (picked.size() < q.min) return -1.0;
  const std::size_t m = std::max<std::size_t>(q.min, 1);
  if (picked.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) sum += picked[i];
  return clamp_score(sum / static_cast<double>(m));
}

double euclid_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::InvalidArgument, "euclidean distance needs equal-length series");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sum);
}

double dtw_distance(std::span<const double> a, std::span<const double> b,
                    std::optional<std::size_t> band) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n == 0 || m == 0) throw Error(ErrorCode::InvalidArgument, "DTW needs non-empty series");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const std::size_t diff = n > m ? n - m : m - n;
  const std::size_t w = band ? std::max(*band, diff) : std::max(n, m);
  std::vector<double> prev(m + 1, kInf);
  std::vector<double> cur(m + 1, kInf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    std::fill(cur.begin(), cur.end(), kInf);
    const std::size_t lo = i > w ? i - w : 1;
    const std::size_t hi = std::min(m, i + w);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double cost = std::abs(a[i - 1] - b[j - 1]);
      cur[j] = cost + std::min({prev[j], cur[j - 1], prev[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double series_distance(std::span<const double> a, std::span<const double> b, SketchMetric metric) {
  return metric == SketchMetric::Euclid ? euclid_distance(a, b) : dtw_distance(a, b);
}

std::vector<double> resample_sketch(std::span<const Point> sketch, std::span<const double> xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  if (sketch.empty()) return out;
  std::size_t seg = 0;
  for (double x : xs) {
    if (x <= sketch.front().x) {
      out.push_back(sketch.front().y);
      continue;
    }
    if (x >= sketch.back().x) {
      out.push_back(sketch.back().y);
      continue;
    }
    while (seg + 1 < sketch.size() && sketch[seg + 1].x < x) ++seg;
    const Point& p = sketch[seg];
    const Point& q = sketch[seg + 1];
    const double t = (x - p.x) / (q.x - p.x);
    out.push_back(p.y + t * (q.y - p.y));
  }
  return out;
}

double normalize_distance(double d, double d_min, double d_max) noexcept {
  if (!(d_max > d_min)) return 1.0;
  return clamp_score(1.0 - 2.0 * (d - d_min) / (d_max - d_min));
}

SketchMatch sketch_distance(std::span<const Point> sketch, const CandidateViz& viz,
                            SketchMetric metric) {
  if (sketch.size() < 2) throw Error(ErrorCode::EmptySketch, "a sketch needs at least two points");
  const double half = viz.bin_width / 2.0;
  const double lo = sketch.front().x - half;
  const double hi = sketch.back().x + half;
  SketchMatch match;
  std::vector<double> xs;
  std::vector<double> ys;
  bool started = false;
  for (std::size_t i = 0; i < viz.size(); ++i) {
    if (viz.bins[i].x < lo || viz.bins[i].x > hi) continue;
    if (!started) {
      match.first = i;
      started = true;
    }
    match.last = i;
    xs.push_back(viz.bins[i].x);
    ys.push_back(viz.bins[i].y);
  }
  if (xs.size() < 2) {
    throw Error(ErrorCode::DegenerateViz,
                "fewer than two bins of '" + viz.id + "' fall inside the sketch");
  }
  std::vector<double> target = resample_sketch(sketch, xs);
  zscore(ys);
  zscore(target);
  match.distance = series_distance(ys, target, metric);
  return match;
}

std::vector<double> normalize_distances(std::span<const double> d) {
  std::vector<double> out(d.size(), 1.0);
  if (d.empty()) return out;
  const auto [mn, mx] = std::minmax_element(d.begin(), d.end());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = normalize_distance(d[i], *mn, *mx);
  return out;
}

namespace {

struct UdpRegistry {
  std::shared_mutex mutex;
  std::map<std::string, UdpFunction, std::less<>> fns;
};

UdpRegistry& registry() {
  static UdpRegistry r;
  return r;
}

}  // namespace

void register_udp(const std::string& name, UdpFunction fn) {
  auto& r = registry();
  std::unique_lock lock(r.mutex);
  r.fns[name] = std::move(fn);
}

bool unregister_udp(const std::string& name) {
  auto& r = registry();
  std::unique_lock lock(r.mutex);
  return r.fns.erase(name) > 0;
}

std::optional<UdpFunction> find_udp(const std::string& name) {
  auto& r = registry();
  std::shared_lock lock(r.mutex);
  auto it = r.fns.find(name);
  if (it == r.fns.end()) return std::nullopt;
  return it->second;
}

namespace detail {

namespace {

bool near_x(double bin_x, double want, double bin_width) {
  return std::abs(bin_x - want) <= bin_width / 2.0 + 1e-9 * std::max(1.0, std::abs(want));
}

bool relation_holds(Comparator c, double s, double t) {
  switch (c) {
    case Comparator::Less: return s < t;
    case Comparator::Greater: return s > t;
    case Comparator::LessMuch: return t >= 0.0 ? s < t / 2.0 : s < 2.0 * t;
    case Comparator::GreaterMuch: return t >= 0.0 ? s > 2.0 * t : s > t / 2.0;
    case Comparator::Equal: return std::abs(s - t) <= 0.1 * std::max(std::abs(s), std::abs(t));
  }
  return false;
}

double sketch_fallback(const Pattern& p, const CandidateViz& viz, std::size_t first,
                       std::size_t last) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = first; i <= last; ++i) {
    xs.push_back(viz.bins[i].x);
    ys.push_back(viz.bins[i].y);
  }
  auto target = resample_sketch(p.sketch, xs);
  zscore(ys);
  zscore(target);
  const double rms = euclid_distance(ys, target) / std::sqrt(static_cast<double>(ys.size()));
  return clamp_score(1.0 - rms);
}

double pattern_score(const ShapeSegment& seg, std::size_t self, const CompiledQuery* nested,
                     const CandidateViz& viz, std::size_t first, std::size_t last,
                     const LineFit* fit, const ScoreContext& ctx) {
  const Pattern& p = seg.pattern;
  const Modifier& m = seg.modifier;
  switch (p.kind) {
    case PatternKind::Any: return 1.0;
    case PatternKind::Empty: return -1.0;
    case PatternKind::Up:
    case PatternKind::Down:
    case PatternKind::Flat:
    case PatternKind::Theta:
      if (m.quantifier) {
        return score_quantifier(viz, first, last, p, *m.quantifier, ctx.quantifier_threshold,
                                m.comparator);
      }
      return fit ? score_slope_pattern(p, m.comparator, fit->slope) : -1.0;
    case PatternKind::PositionRef: {
      if (!fit) return -1.0;
      auto target = resolve_position(p.ref, self, std::numeric_limits<std::size_t>::max());
      if (!target || *target >= ctx.sibling_fits.size() || !ctx.sibling_fits[*target]) {
        return 1.0;
      }
      const double t = m.multiplier.value_or(1.0) * ctx.sibling_fits[*target]->slope;
      return relation_holds(m.comparator.value_or(Comparator::Equal), fit->slope, t) ? 1.0 : -1.0;
    }
    case PatternKind::Nested: {
      if (!nested) return -1.0;
      CandidateViz sub = slice_viz(viz, first, last);
      if (sub.size() < nested->k() + 1) return -1.0;
      try {
        return clamp_score(solve_dp(*nested, sub).total);
      } catch (const Error&) {
        return -1.0;
      }
    }
    case PatternKind::Udp: {
      if (!fit) return -1.0;
      auto fn = find_udp(p.udp);
      if (!fn) return -1.0;
      try {
        return clamp_score((*fn)(VisualSegment{&viz, first, last, *fit}));
      } catch (...) {
        return -1.0;
      }
    }
    case PatternKind::Sketch:
      return sketch_fallback(p, viz, first, last);
  }
  return -1.0;
}

}  // namespace

double eval_segment(const ShapeSegment& seg, std::size_t self, const CompiledQuery* nested,
                    const CandidateViz& viz, std::size_t first, std::size_t last,
                    const LineFit* fit, const ScoreContext& ctx, bool gated) {
  if (last <= first || last >= viz.size()) return -1.0;
  const Location& loc = seg.location;
  if (gated) {
    if (loc.x_start && !near_x(viz.bins[first].x, *loc.x_start, viz.bin_width)) return -1.0;
    if (loc.x_end && !near_x(viz.bins[last].x, *loc.x_end, viz.bin_width)) return -1.0;
    if (loc.has_y()) {
      if (!fit) return -1.0;
      const double tol = ctx.y_tolerance * (viz.y_hi - viz.y_lo) + 1e-9;
      if (loc.y_start && std::abs(fit->at(static_cast<double>(first)) - *loc.y_start) > tol) {
        return -1.0;
      }
      if (loc.y_end && std::abs(fit->at(static_cast<double>(last)) - *loc.y_end) > tol) {
        return -1.0;
      }
    }
  }
  if (loc.iterator_width) {
    const std::size_t w = *loc.iterator_width;
    if (last - first < w) return -1.0;
    double best = -1.0;
    for (std::size_t i = first; i + w <= last; ++i) {
      SummarizedStats s;
      for (std::size_t t = i; t <= i + w; ++t) s += viz.bins[t].stats;
      auto wf = try_fit_line(s);
      if (wf) {
        wf->x_start = i;
        wf->x_end = i + w;
      }
      best = std::max(best, pattern_score(seg, self, nested, viz, i, i + w,
                                          wf ? &*wf : nullptr, ctx));
    }
    return best;
  }
  return clamp_score(pattern_score(seg, self, nested, viz, first, last, fit, ctx));
}

}  // namespace detail

double score_shape_segment(const ShapeSegment& segment, std::size_t self_index,
                           const CandidateViz& viz, std::size_t first, std::size_t last,
                           const ScoreContext& ctx) {
  if (last <= first || last >= viz.size()) return -1.0;
  SummarizedStats s;
  for (std::size_t i = first; i <= last; ++i) s += viz.bins[i].stats;
  auto fit = try_fit_line(s);
  if (fit) {
    fit->x_start = first;
    fit->x_end = last;
  }
  std::unique_ptr<CompiledQuery> nested;
  if (segment.pattern.kind == PatternKind::Nested && segment.pattern.nested) {
    try {
      nested = std::make_unique<CompiledQuery>(*segment.pattern.nested);
    } catch (const Error&) {
      return -1.0;
    }
  }
  return detail::eval_segment(segment, self_index, nested.get(), viz, first, last,
                              fit ? &*fit : nullptr, ctx, true);
}

}  // namespace trendseek
