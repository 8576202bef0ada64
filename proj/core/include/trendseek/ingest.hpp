#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "trendseek/algebra.hpp"
#include "trendseek/stats.hpp"

namespace trendseek {

enum class ColumnKind { Numeric, Categorical, Date };

std::string_view to_string(ColumnKind kind) noexcept;

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::vector<double> values;      // Numeric and Date (epoch days); NaN when empty
  std::vector<std::string> text;   // Categorical
};

/// Immutable once loaded.
struct Dataset {
  std::string name;
  std::vector<Column> columns;
  std::size_t row_count = 0;

  const Column* find(std::string_view column) const noexcept;
  /// Throws Error(UnknownColumn).
  const Column& column(std::string_view column) const;
};

using SchemaHints = std::map<std::string, ColumnKind, std::less<>>;

Dataset load_csv(const std::filesystem::path& path, const SchemaHints& hints = {});
Dataset parse_csv(std::string_view content, std::string name, const SchemaHints& hints = {});

/// Epoch days for "YYYY-MM-DD" with an optional "THH:MM[:SS]" suffix.
std::optional<double> parse_iso_date(std::string_view text);
std::string format_iso_date(double epoch_days);

enum class FilterOp { Eq, Ne, Lt, Le, Gt, Ge };

struct Filter {
  std::string column;
  FilterOp op = FilterOp::Eq;
  std::string literal;
};

/// Parses "col op value" with op one of = == != <> < <= > >=.
Filter parse_filter(std::string_view text);

enum class Aggregation { Avg, Sum, Min, Max, Count };

Aggregation parse_aggregation(std::string_view text);
std::string_view to_string(Aggregation agg) noexcept;

struct VisualSpec {
  std::string z_attr;
  std::string x_attr;
  std::string y_attr;
  std::vector<Filter> filters;
  std::optional<double> bin_width;
  Aggregation aggregation = Aggregation::Avg;
  std::size_t pixels_x = 500;
};

struct XRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct Record {
  std::string z;
  double x = 0.0;
  double y = 0.0;
};

/// Filters and sorts by (z, x). When ranges are given, records outside every
/// range widened by `margin` are dropped. Throws Error(UnknownColumn).
std::vector<Record> extract(const Dataset& dataset, const VisualSpec& spec,
                            std::span<const XRange> ranges = {}, double margin = 0.0);

struct BinGrid {
  double origin = 0.0;
  double width = 1.0;
  std::size_t count = 1;

  std::size_t index_of(double x) const noexcept;
};

BinGrid make_bin_grid(double x_min, double x_max, const VisualSpec& spec);

/// Grid over the x extent of the filtered records of the whole dataset.
std::optional<BinGrid> bin_grid_for(const Dataset& dataset, const VisualSpec& spec);

struct Bin {
  std::size_t grid = 0;   // index in the dataset-wide bin grid
  double x = 0.0;         // mean x of the bin's records, data units
  double y = 0.0;         // aggregated (and possibly z-normalized) value
  std::size_t count = 0;  // records that fell into the bin
  SummarizedStats stats;  // over (dense bin index, y)
};

struct CandidateViz {
  std::string id;
  std::vector<Bin> bins;
  double bin_width = 1.0;
  std::vector<std::pair<std::size_t, std::size_t>> covered;  // grid index ranges
  std::vector<Point> raw;
  double y_lo = 0.0;  // y extent over bins, refreshed by reindex()
  double y_hi = 0.0;

  std::size_t size() const noexcept { return bins.size(); }
  double y(std::size_t i) const noexcept { return bins[i].y; }
};

struct GroupResult {
  std::vector<CandidateViz> vizs;
  std::vector<std::string> warnings;
};

/// Records must be sorted by (z, x). Vizs with fewer than two nonempty bins
/// are skipped with a warning.
GroupResult group_and_bin(std::span<const Record> records, const VisualSpec& spec, bool normalize,
                          const std::optional<BinGrid>& grid = std::nullopt,
                          bool keep_raw = false);

/// (y - mean) / population stddev; a constant series becomes all zeros.
/// Returns (mean, stddev) with stddev 0 for constant input.
std::pair<double, double> zscore(std::span<double> ys) noexcept;

/// Rebuilds every bin's stats from its position in the viz and, when
/// `normalize` is set, z-normalizes y first.
void reindex(CandidateViz& viz, bool normalize);

/// Bins [a, b] of `viz`, re-indexed from zero.
CandidateViz slice_viz(const CandidateViz& viz, std::size_t a, std::size_t b);

/// Builds a viz whose bin i sits at x = i.
CandidateViz make_viz(std::string id, std::span<const double> ys, bool normalize = false);

}  // namespace trendseek
