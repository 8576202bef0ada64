#include "trendseek/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "trendseek/errors.hpp"
#include "trendseek/parser.hpp"

namespace trendseek {

std::string_view to_string(ColumnKind kind) noexcept {
  switch (kind) {
    case ColumnKind::Numeric: return "numeric";
    case ColumnKind::Categorical: return "categorical";
    case ColumnKind::Date: return "date";
  }
  return "categorical";
}

const Column* Dataset::find(std::string_view name) const noexcept {
  for (const auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const Column& Dataset::column(std::string_view name) const {
  if (const Column* c = find(name)) return *c;
  throw Error(ErrorCode::UnknownColumn, "unknown column '" + std::string(name) + "'");
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// RFC-4180 reader. Returns false at end of input.
class CsvReader {
 public:
  explicit CsvReader(std::string_view data) : data_(data) {
    if (data_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
  }

  bool next_row(std::vector<std::string>& row) {
    row.clear();
    if (pos_ >= data_.size()) return false;
    ++line_;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    while (pos_ < data_.size()) {
      const char c = data_[pos_];
      if (quoted) {
        if (c == '"') {
          if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '"') {
            field += '"';
            pos_ += 2;
            continue;
          }
          quoted = false;
          ++pos_;
          continue;
        }
        if (c == '\n') ++line_;
        field += c;
        ++pos_;
        continue;
      }
      if (c == '"' && !was_quoted && trim(field).empty()) {
        field.clear();
        quoted = true;
        was_quoted = true;
        ++pos_;
        continue;
      }
      if (c == ',') {
        row.push_back(std::move(field));
        field.clear();
        was_quoted = false;
        ++pos_;
        continue;
      }
      if (c == '\r' || c == '\n') {
        ++pos_;
        if (c == '\r' && pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
        row.push_back(std::move(field));
        return true;
      }
      field += c;
      ++pos_;
    }
    if (quoted) {
      throw Error(ErrorCode::Schema,
                  "unterminated quoted field starting on line " + std::to_string(line_));
    }
    row.push_back(std::move(field));
    return true;
  }

  std::size_t line() const noexcept { return line_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

bool blank_row(const std::vector<std::string>& row) {
  return row.size() == 1 && trim(row[0]).empty();
}

ColumnKind infer_kind(const std::vector<std::vector<std::string>>& rows, std::size_t col) {
  bool numeric = true;
  bool date = true;
  std::size_t seen = 0;
  for (const auto& row : rows) {
    const auto cell = trim(row[col]);
    if (cell.empty()) continue;
    if (numeric && !parse_double(cell)) numeric = false;
    if (date && !parse_iso_date(cell)) date = false;
    if (++seen == 100 || (!numeric && !date)) break;
  }
  if (seen == 0) return ColumnKind::Categorical;
  if (numeric) return ColumnKind::Numeric;
  if (date) return ColumnKind::Date;
  return ColumnKind::Categorical;
}

}  // namespace

std::optional<double> parse_iso_date(std::string_view text) {
  text = trim(text);
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto y = parse_int(text.substr(0, 4));
  auto m = parse_int(text.substr(5, 2));
  auto d = parse_int(text.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{*y},
                                        std::chrono::month{static_cast<unsigned>(*m)},
                                        std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  double days = static_cast<double>(std::chrono::sys_days{ymd}.time_since_epoch().count());
  auto rest = text.substr(10);
  if (rest.empty()) return days;
  if (rest.front() != 'T' && rest.front() != ' ') return std::nullopt;
  rest.remove_prefix(1);
  if (!rest.empty() && rest.back() == 'Z') rest.remove_suffix(1);
  if (rest.size() != 5 && rest.size() != 8) return std::nullopt;
  auto hh = parse_int(rest.substr(0, 2));
  auto mm = parse_int(rest.substr(3, 2));
  std::optional<int> ss = 0;
  if (rest.size() == 8) ss = parse_int(rest.substr(6, 2));
  if (rest[2] != ':' || (rest.size() == 8 && rest[5] != ':') || !hh || !mm || !ss ||
      *hh > 23 || *mm > 59 || *ss > 60 || *hh < 0 || *mm < 0 || *ss < 0) {
    return std::nullopt;
  }
  return days + (*hh * 3600.0 + *mm * 60.0 + *ss) / 86400.0;
}

std::string format_iso_date(double epoch_days) {
  const auto whole = static_cast<long>(std::floor(epoch_days));
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{whole}}};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Dataset parse_csv(std::string_view content, std::string name, const SchemaHints& hints) {
  CsvReader reader(content);
  std::vector<std::string> header;
  do {
    if (!reader.next_row(header)) throw Error(ErrorCode::EmptyDataset, "file has no header row");
  } while (blank_row(header));
  for (auto& h : header) h = std::string(trim(h));
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i].empty()) {
      throw Error(ErrorCode::Schema, "empty column name at column " + std::to_string(i + 1));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (header[i] == header[j]) {
        throw Error(ErrorCode::Schema, "duplicate column name '" + header[i] + "'");
      }
    }
  }

  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;
  std::vector<std::string> row;
  while (reader.next_row(row)) {
    if (blank_row(row)) continue;
    if (row.size() != header.size()) {
      throw Error(ErrorCode::Schema, "row on line " + std::to_string(reader.line()) + " has " +
                                         std::to_string(row.size()) + " fields, expected " +
                                         std::to_string(header.size()));
    }
    rows.push_back(row);
    lines.push_back(reader.line());
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyDataset, "file has a header but no data rows");

  Dataset ds;
  ds.name = std::move(name);
  ds.row_count = rows.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    Column col;
    col.name = header[c];
    auto hint = hints.find(col.name);
    col.kind = hint != hints.end() ? hint->second : infer_kind(rows, c);
    if (col.kind == ColumnKind::Categorical) {
      col.text.reserve(rows.size());
      for (const auto& r : rows) col.text.emplace_back(trim(r[c]));
    } else {
      col.values.reserve(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto cell = trim(rows[r][c]);
        if (cell.empty()) {
          col.values.push_back(kNaN);
          continue;
        }
        auto v = col.kind == ColumnKind::Numeric ? parse_double(cell) : parse_iso_date(cell);
        if (!v) {
          throw Error(ErrorCode::Schema, "cannot parse '" + std::string(cell) + "' as " +
                                             std::string(to_string(col.kind)) + " (line " +
                                             std::to_string(lines[r]) + ", column '" + col.name +
                                             "')");
        }
        col.values.push_back(*v);
      }
    }
    ds.columns.push_back(std::move(col));
  }
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, const SchemaHints& hints) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "cannot read '" + path.string() + "'");
  return parse_csv(buf.str(), path.stem().string(), hints);
}

Filter parse_filter(std::string_view text) {
  static constexpr std::pair<std::string_view, FilterOp> kOps[] = {
      {"!=", FilterOp::Ne}, {"<>", FilterOp::Ne}, {"<=", FilterOp::Le}, {">=", FilterOp::Ge},
      {"==", FilterOp::Eq}, {"=", FilterOp::Eq},  {"<", FilterOp::Lt},  {">", FilterOp::Gt},
  };
  std::size_t best = std::string_view::npos;
  std::pair<std::string_view, FilterOp> found{};
  for (const auto& op : kOps) {
    const auto at = text.find(op.first);
    if (at != std::string_view::npos && (at < best || (at == best && op.first.size() > found.first.size()))) {
      best = at;
      found = op;
    }
  }
  if (best == std::string_view::npos) {
    throw Error(ErrorCode::InvalidArgument,
                "filter '" + std::string(text) + "' needs an operator (= != < <= > >=)");
  }
  Filter f;
  f.column = std::string(trim(text.substr(0, best)));
  f.op = found.second;
  f.literal = std::string(trim(text.substr(best + found.first.size())));
  if (f.column.empty()) {
    throw Error(ErrorCode::InvalidArgument, "filter '" + std::string(text) + "' has no column");
  }
  return f;
}

Aggregation parse_aggregation(std::string_view text) {
  if (text == "avg" || text == "mean") return Aggregation::Avg;
  if (text == "sum") return Aggregation::Sum;
  if (text == "min") return Aggregation::Min;
  if (text == "max") return Aggregation::Max;
  if (text == "count") return Aggregation::Count;
  throw Error(ErrorCode::InvalidArgument,
              "unknown aggregation '" + std::string(text) + "' (avg, sum, min, max, count)");
}

std::string_view to_string(Aggregation agg) noexcept {
  switch (agg) {
    case Aggregation::Avg: return "avg";
    case Aggregation::Sum: return "sum";
    case Aggregation::Min: return "min";
    case Aggregation::Max: return "max";
    case Aggregation::Count: return "count";
  }
  return "avg";
}

namespace {

template <typename T>
bool compare(const T& a, FilterOp op, const T& b) {
  switch (op) {
    case FilterOp::Eq: return a == b;
    case FilterOp::Ne: return a != b;
    case FilterOp::Lt: return a < b;
    case FilterOp::Le: return a <= b;
    case FilterOp::Gt: return a > b;
    case FilterOp::Ge: return a >= b;
  }
  return false;
}

struct BoundFilter {
  const Column* column;
  FilterOp op;
  double number = 0.0;
  std::string text;

  bool keep(std::size_t row) const {
    if (column->kind == ColumnKind::Categorical) return compare(column->text[row], op, text);
    const double v = column->values[row];
    if (std::isnan(v)) return false;
    return compare(v, op, number);
  }
};

std::vector<BoundFilter> bind_filters(const Dataset& ds, const VisualSpec& spec) {
  std::vector<BoundFilter> out;
  for (const auto& f : spec.filters) {
    BoundFilter b{&ds.column(f.column), f.op, 0.0, {}};
    if (b.column->kind == ColumnKind::Categorical) {
      b.text = f.literal;
    } else {
      std::optional<double> v = b.column->kind == ColumnKind::Date ? parse_iso_date(f.literal)
                                                                   : std::nullopt;
      if (!v) v = parse_double(f.literal);
      if (!v) {
        throw Error(ErrorCode::InvalidArgument, "filter literal '" + f.literal +
                                                    "' is not valid for column '" + f.column + "'");
      }
      b.number = *v;
    }
    out.push_back(std::move(b));
  }
  return out;
}

struct Axes {
  const Column* z;
  const Column* x;
  const Column* y;
};

Axes bind_axes(const Dataset& ds, const VisualSpec& spec) {
  Axes a{&ds.column(spec.z_attr), &ds.column(spec.x_attr), &ds.column(spec.y_attr)};
  if (a.x->kind == ColumnKind::Categorical) {
    throw Error(ErrorCode::InvalidArgument, "x column '" + spec.x_attr + "' must be numeric or date");
  }
  if (a.y->kind == ColumnKind::Categorical && spec.aggregation != Aggregation::Count) {
    throw Error(ErrorCode::InvalidArgument,
                "y column '" + spec.y_attr + "' must be numeric unless aggregating with count");
  }
  return a;
}

std::string z_text(const Column& z, std::size_t row) {
  switch (z.kind) {
    case ColumnKind::Categorical: return z.text[row];
    case ColumnKind::Date: return format_iso_date(z.values[row]);
    case ColumnKind::Numeric: return format_number(z.values[row]);
  }
  return {};
}

double y_value(const Column& y, std::size_t row) {
  if (y.kind == ColumnKind::Categorical) return 1.0;
  return y.values[row];
}

template <typename Fn>
void for_each_row(const Dataset& ds, const VisualSpec& spec, Fn&& fn) {
  const Axes axes = bind_axes(ds, spec);
  const auto filters = bind_filters(ds, spec);
  for (std::size_t r = 0; r < ds.row_count; ++r) {
    const double x = axes.x->values[r];
    const double y = y_value(*axes.y, r);
    if (std::isnan(x) || std::isnan(y)) continue;
    if (axes.z->kind != ColumnKind::Categorical && std::isnan(axes.z->values[r])) continue;
    bool keep = true;
    for (const auto& f : filters) {
      if (!f.keep(r)) {
        keep = false;
        break;
      }
    }
    if (keep) fn(r, axes, x, y);
  }
}

}  // namespace

std::vector<Record> extract(const Dataset& ds, const VisualSpec& spec,
                            std::span<const XRange> ranges, double margin) {
  std::vector<Record> out;
  for_each_row(ds, spec, [&](std::size_t r, const Axes& axes, double x, double y) {
    if (!ranges.empty()) {
      bool inside = false;
      for (const auto& rg : ranges) {
        if (x >= rg.lo - margin && x <= rg.hi + margin) {
          inside = true;
          break;
        }
      }
      if (!inside) return;
    }
    out.push_back({z_text(*axes.z, r), x, y});
  });
  std::stable_sort(out.begin(), out.end(), [](const Record& a, const Record& b) {
    if (a.z != b.z) return a.z < b.z;
    return a.x < b.x;
  });
  return out;
}

std::size_t BinGrid::index_of(double x) const noexcept {
  if (!(x > origin)) return 0;
  const double idx = std::floor((x - origin) / width);
  if (idx >= static_cast<double>(count - 1)) return count - 1;
  return static_cast<std::size_t>(idx);
}

BinGrid make_bin_grid(double x_min, double x_max, const VisualSpec& spec) {
  BinGrid g;
  g.origin = x_min;
  const double extent = x_max - x_min;
  if (spec.bin_width) {
    if (!(*spec.bin_width > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "bin width must be positive");
    }
    g.width = *spec.bin_width;
    g.count = static_cast<std::size_t>(std::floor(extent / g.width)) + 1;
  } else {
    const std::size_t pixels = std::max<std::size_t>(spec.pixels_x, 1);
    if (extent > 0.0) {
      g.width = extent / static_cast<double>(pixels);
      g.count = pixels;
    } else {
      g.width = 1.0;
      g.count = 1;
    }
  }
  return g;
}

std::optional<BinGrid> bin_grid_for(const Dataset& ds, const VisualSpec& spec) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for_each_row(ds, spec, [&](std::size_t, const Axes&, double x, double) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  });
  if (lo > hi) return std::nullopt;
  return make_bin_grid(lo, hi, spec);
}

std::pair<double, double> zscore(std::span<double> ys) noexcept {
  if (ys.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double y : ys) mean += y;
  mean /= static_cast<double>(ys.size());
  double var = 0.0;
  for (double y : ys) var += (y - mean) * (y - mean);
  var /= static_cast<double>(ys.size());
  const double sd = std::sqrt(var);
  // Treat relative noise at machine precision as a constant series.
  if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
    for (double& y : ys) y = 0.0;
    return {mean, 0.0};
  }
  for (double& y : ys) y = (y - mean) / sd;
  return {mean, sd};
}

void reindex(CandidateViz& viz, bool normalize) {
  if (normalize) {
    std::vector<double> ys(viz.bins.size());
    for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = viz.bins[i].y;
    zscore(ys);
    for (std::size_t i = 0; i < ys.size(); ++i) viz.bins[i].y = ys[i];
  }
  viz.y_lo = viz.bins.empty() ? 0.0 : viz.bins[0].y;
  viz.y_hi = viz.y_lo;
  for (std::size_t i = 0; i < viz.bins.size(); ++i) {
    SummarizedStats s;
    s.add(static_cast<double>(i), viz.bins[i].y);
    viz.bins[i].stats = s;
    viz.y_lo = std::min(viz.y_lo, viz.bins[i].y);
    viz.y_hi = std::max(viz.y_hi, viz.bins[i].y);
  }
}

CandidateViz slice_viz(const CandidateViz& viz, std::size_t a, std::size_t b) {
  CandidateViz out;
  out.id = viz.id;
  out.bin_width = viz.bin_width;
  if (a < viz.bins.size() && a <= b) {
    b = std::min(b, viz.bins.size() - 1);
    out.bins.assign(viz.bins.begin() + static_cast<std::ptrdiff_t>(a),
                    viz.bins.begin() + static_cast<std::ptrdiff_t>(b) + 1);
    out.covered.push_back({out.bins.front().grid, out.bins.back().grid});
  }
  reindex(out, false);
  return out;
}

CandidateViz make_viz(std::string id, std::span<const double> ys, bool normalize) {
  CandidateViz viz;
  viz.id = std::move(id);
  viz.bins.resize(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    viz.bins[i].grid = i;
    viz.bins[i].x = static_cast<double>(i);
    viz.bins[i].y = ys[i];
    viz.bins[i].count = 1;
  }
  if (!ys.empty()) viz.covered.push_back({0, ys.size() - 1});
  reindex(viz, normalize);
  return viz;
}

namespace {

struct BinAccumulator {
  std::size_t grid = 0;
  std::size_t count = 0;
  double sum_x = 0.0;
  double sum_y = 0.0;
  double min_y = std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  double value(Aggregation agg) const {
    switch (agg) {
      case Aggregation::Avg: return sum_y / static_cast<double>(count);
      case Aggregation::Sum: return sum_y;
      case Aggregation::Min: return min_y;
      case Aggregation::Max: return max_y;
      case Aggregation::Count: return static_cast<double>(count);
    }
    return 0.0;
  }
};

}  // namespace

GroupResult group_and_bin(std::span<const Record> records, const VisualSpec& spec, bool normalize,
                          const std::optional<BinGrid>& grid_in, bool keep_raw) {
  GroupResult out;
  if (records.empty()) return out;
  BinGrid grid;
  if (grid_in) {
    grid = *grid_in;
  } else {
    double lo = records.front().x;
    double hi = lo;
    for (const auto& r : records) {
      lo = std::min(lo, r.x);
      hi = std::max(hi, r.x);
    }
    grid = make_bin_grid(lo, hi, spec);
  }

  std::size_t i = 0;
  while (i < records.size()) {
    std::size_t j = i;
    while (j < records.size() && records[j].z == records[i].z) ++j;
    CandidateViz viz;
    viz.id = records[i].z;
    viz.bin_width = grid.width;
    std::vector<BinAccumulator> acc;
    for (std::size_t r = i; r < j; ++r) {
      const std::size_t g = grid.index_of(records[r].x);
      if (acc.empty() || acc.back().grid != g) {
        // Records are sorted by x, so bins arrive in ascending grid order.
        acc.push_back({});
        acc.back().grid = g;
      }
      auto& a = acc.back();
      ++a.count;
      a.sum_x += records[r].x;
      a.sum_y += records[r].y;
      a.min_y = std::min(a.min_y, records[r].y);
      a.max_y = std::max(a.max_y, records[r].y);
      if (keep_raw) viz.raw.push_back({records[r].x, records[r].y});
    }
    for (const auto& a : acc) {
      Bin b;
      b.grid = a.grid;
      b.x = a.sum_x / static_cast<double>(a.count);
      b.y = a.value(spec.aggregation);
      b.count = a.count;
      viz.bins.push_back(b);
    }
    if (!viz.bins.empty()) viz.covered.push_back({viz.bins.front().grid, viz.bins.back().grid});
    if (viz.bins.size() < 2) {
      out.warnings.push_back("skipped '" + viz.id + "': fewer than two nonempty bins");
    } else {
      reindex(viz, normalize);
      out.vizs.push_back(std::move(viz));
    }
    i = j;
  }
  return out;
}

}  // namespace trendseek
