#include "trendseek/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "trendseek/errors.hpp"

namespace trendseek {

namespace {

std::string_view pattern_name(PatternKind kind) {
  switch (kind) {
    case PatternKind::Up: return "up";
    case PatternKind::Down: return "down";
    case PatternKind::Flat: return "flat";
    case PatternKind::Theta: return "theta";
    case PatternKind::Any: return "any";
    case PatternKind::Empty: return "empty";
    case PatternKind::Sketch: return "sketch";
    case PatternKind::PositionRef: return "position";
    case PatternKind::Nested: return "nested";
    case PatternKind::Udp: return "udp";
  }
  return "any";
}

std::string_view node_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::Segment: return "segment";
    case NodeKind::Concat: return "concat";
    case NodeKind::And: return "and";
    case NodeKind::Or: return "or";
    case NodeKind::Not: return "not";
  }
  return "segment";
}

std::string_view comparator_text(Comparator c) {
  switch (c) {
    case Comparator::Less: return "<";
    case Comparator::LessMuch: return "<<";
    case Comparator::Greater: return ">";
    case Comparator::GreaterMuch: return ">>";
    case Comparator::Equal: return "=";
  }
  return "=";
}

std::string ref_text(const PositionRef& ref) {
  switch (ref.mode) {
    case PositionRef::Mode::Previous: return "$-";
    case PositionRef::Mode::Next: return "$+";
    case PositionRef::Mode::Absolute: break;
  }
  return "$" + std::to_string(ref.index);
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json x_value(double x, bool date) { return date ? Json(format_iso_date(x)) : Json(x); }

Json segment_to_json(const ShapeSegment& s) {
  Json loc = Json::object();
  loc["x_start"] = optional_number(s.location.x_start);
  loc["x_end"] = optional_number(s.location.x_end);
  loc["y_start"] = optional_number(s.location.y_start);
  loc["y_end"] = optional_number(s.location.y_end);
  loc["iterator_width"] =
      s.location.iterator_width ? Json(*s.location.iterator_width) : Json(nullptr);

  Json pat = Json::object();
  pat["kind"] = pattern_name(s.pattern.kind);
  switch (s.pattern.kind) {
    case PatternKind::Theta:
      pat["degrees"] = s.pattern.angle_deg;
      break;
    case PatternKind::Sketch: {
      Json pts = Json::array();
      for (const auto& p : s.pattern.sketch) pts.push_back({p.x, p.y});
      pat["points"] = std::move(pts);
      break;
    }
    case PatternKind::PositionRef:
      pat["ref"] = ref_text(s.pattern.ref);
      break;
    case PatternKind::Nested:
      pat["query"] = s.pattern.nested ? ast_to_json(*s.pattern.nested) : Json(nullptr);
      break;
    case PatternKind::Udp:
      pat["name"] = s.pattern.udp;
      break;
    default:
      break;
  }

  Json mod = Json::object();
  if (s.modifier.quantifier) {
    mod["quantifier"] = {{"min", s.modifier.quantifier->min},
                         {"max", s.modifier.quantifier->max ? Json(*s.modifier.quantifier->max)
                                                            : Json(nullptr)}};
  } else {
    mod["quantifier"] = nullptr;
  }
  mod["comparator"] =
      s.modifier.comparator ? Json(comparator_text(*s.modifier.comparator)) : Json(nullptr);
  mod["multiplier"] = optional_number(s.modifier.multiplier);

  return {{"kind", "segment"}, {"location", loc}, {"pattern", pat}, {"modifier", mod}};
}

// Text spans of the query's top-level segments, in preorder.
std::vector<Span> segment_spans(std::string_view text) {
  std::vector<Span> out;
  const auto tokens = tokenize(text);
  int depth = 0;
  std::size_t start = 0;
  for (const auto& t : tokens) {
    if (t.kind == TokenKind::LBracket) {
      if (depth == 0) start = t.span.begin;
      ++depth;
    } else if (t.kind == TokenKind::RBracket) {
      if (--depth == 0) out.push_back({start, t.span.end});
    } else if (depth == 0 && t.kind == TokenKind::Ident) {
      out.push_back(t.span);
    }
  }
  return out;
}

std::size_t count_segments(const ShapeQuery& q) {
  if (q.is_segment()) return 1;
  std::size_t n = 0;
  for (const auto& c : q.children) n += count_segments(c);
  return n;
}

}  // namespace

Json ast_to_json(const ShapeQuery& ast) {
  if (ast.is_segment()) return segment_to_json(ast.segment);
  Json children = Json::array();
  for (const auto& c : ast.children) children.push_back(ast_to_json(c));
  return {{"kind", node_name(ast.kind)}, {"children", std::move(children)}};
}

Json fit_to_json(const LineFit& fit) {
  return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"n_points", fit.n_points}};
}

Json result_to_json(const RankedResult& r, bool x_is_date) {
  Json bps = Json::array();
  for (std::size_t i = 0; i < r.breakpoints.size(); ++i) {
    bps.push_back({{"index", r.breakpoints[i]}, {"x", x_value(r.breakpoint_x[i], x_is_date)}});
  }
  Json fits = Json::array();
  for (const auto& f : r.fits) fits.push_back(fit_to_json(f));
  Json segs = Json::array();
  for (const auto& s : r.segments) {
    segs.push_back({{"x0", x_value(s[0].x, x_is_date)},
                    {"y0", s[0].y},
                    {"x1", x_value(s[1].x, x_is_date)},
                    {"y1", s[1].y}});
  }
  Json xs = Json::array();
  Json ys = Json::array();
  for (const auto& p : r.series) {
    xs.push_back(x_value(p.x, x_is_date));
    ys.push_back(p.y);
  }
  return {{"id", r.viz_id},
          {"total", r.total},
          {"expr_scores", r.expr_scores},
          {"breakpoints", std::move(bps)},
          {"fits", std::move(fits)},
          {"segments", std::move(segs)},
          {"series", {{"x", std::move(xs)}, {"y", std::move(ys)}}}};
}

Json response_to_json(const QueryOutput& output, const ShapeQuery& ast) {
  Json results = Json::array();
  for (const auto& r : output.results) results.push_back(result_to_json(r, output.x_is_date));
  const ShapeQuery normalized = normalize_ast(ast);
  Json timing = Json::object();
  for (const auto& [stage, ms] : output.timing_ms) timing[stage] = ms;
  const auto& st = output.stats;
  Json stats = {{"vizs", st.vizs},
                {"eager_dropped", st.eager_dropped},
                {"bins_materialized", st.bins_materialized},
                {"min_materialized_x", optional_number(st.min_materialized_x)},
                {"reached_root", st.prune.reached_root},
                {"pruned", st.prune.pruned}};
  return {{"parsed",
           {{"canonical", format_shapequery(normalized)}, {"ast", ast_to_json(normalized)}}},
          {"results", std::move(results)},
          {"warnings", output.warnings},
          {"timing_ms", std::move(timing)},
          {"stats", std::move(stats)}};
}

Span issue_span(std::string_view text, const ShapeQuery& raw, std::string_view path) {
  const ShapeQuery* node = &raw;
  std::size_t first = 0;
  std::size_t pos = 0;
  while (pos < path.size()) {
    if (path[pos] == '/') {
      ++pos;
      continue;
    }
    std::size_t idx = 0;
    const auto [ptr, ec] = std::from_chars(path.data() + pos, path.data() + path.size(), idx);
    if (ec != std::errc() || node->is_segment() || idx >= node->children.size()) break;
    for (std::size_t i = 0; i < idx; ++i) first += count_segments(node->children[i]);
    node = &node->children[idx];
    pos = static_cast<std::size_t>(ptr - path.data());
  }
  const std::size_t count = count_segments(*node);
  std::vector<Span> spans;
  try {
    spans = segment_spans(text);
  } catch (const Error&) {
  }
  if (count == 0 || first + count > spans.size()) return {0, text.size()};
  return {spans[first].begin, spans[first + count - 1].end};
}

Json parse_report(std::string_view text) {
  Json out = {{"ok", false}, {"canonical", nullptr}, {"ast", nullptr}, {"issues", Json::array()}};
  ShapeQuery raw;
  try {
    raw = parse_shapequery_raw(text);
  } catch (const ParseError& e) {
    Json expected = Json::array();
    for (auto k : e.expected()) expected.push_back(to_string(k));
    out["issues"].push_back({{"code", to_string(e.code())},
                             {"message", e.what()},
                             {"path", nullptr},
                             {"span", {{"begin", e.span().begin}, {"end", e.span().end}}},
                             {"expected", std::move(expected)}});
    return out;
  } catch (const Error& e) {
    out["issues"].push_back({{"code", to_string(e.code())},
                             {"message", e.what()},
                             {"path", nullptr},
                             {"span", {{"begin", 0}, {"end", text.size()}}}});
    return out;
  }
  const ValidationReport report = validate_ast(raw);
  for (const auto& issue : report.issues) {
    const Span span = issue_span(text, raw, issue.path);
    out["issues"].push_back({{"code", issue.code},
                             {"message", issue.message},
                             {"path", issue.path},
                             {"span", {{"begin", span.begin}, {"end", span.end}}}});
  }
  if (!report.ok) return out;
  const ShapeQuery normalized = normalize_ast(raw);
  out["ok"] = true;
  out["canonical"] = format_shapequery(normalized);
  out["ast"] = ast_to_json(normalized);
  return out;
}

Json dataset_to_json(const Dataset& dataset) {
  Json cols = Json::array();
  for (const auto& c : dataset.columns) cols.push_back({{"name", c.name}, {"kind", to_string(c.kind)}});
  return {{"name", dataset.name}, {"columns", std::move(cols)}, {"row_count", dataset.row_count}};
}

Json viz_to_json(const CandidateViz& viz) {
  Json xs = Json::array();
  Json ys = Json::array();
  for (const auto& b : viz.bins) {
    xs.push_back(b.x);
    ys.push_back(b.y);
  }
  return {{"id", viz.id}, {"x", std::move(xs)}, {"y", std::move(ys)}};
}

Json error_json(const Error& error) {
  return {{"error", to_string(error.code())}, {"message", error.what()}};
}

RankedResult downsample(const RankedResult& result, std::size_t max_points) {
  const std::size_t n = result.series.size();
  if (n <= max_points || max_points < 2) return result;
  std::set<std::size_t> keep(result.breakpoints.begin(), result.breakpoints.end());
  keep.insert(0);
  keep.insert(n - 1);
  const std::size_t budget = max_points > keep.size() ? max_points - keep.size() : 0;
  for (std::size_t i = 0; i < budget; ++i) {
    keep.insert(i * (n - 1) / std::max<std::size_t>(1, budget - 1));
    if (keep.size() >= max_points) break;
  }
  RankedResult out = result;
  out.series.clear();
  std::vector<std::size_t> index(n, 0);
  for (std::size_t i : keep) {
    index[i] = out.series.size();
    out.series.push_back(result.series[i]);
  }
  for (auto& b : out.breakpoints) b = index[b];
  return out;
}

}  // namespace trendseek
