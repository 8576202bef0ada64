#pragma once

#include <cstddef>
#include <optional>

namespace trendseek {

/// The five additive sums that determine a least-squares line.
struct SummarizedStats {
  std::size_t n = 0;
  double sum_x = 0.0;
  double sum_y = 0.0;
  double sum_xy = 0.0;
  double sum_xx = 0.0;

  void add(double x, double y) noexcept {
    ++n;
    sum_x += x;
    sum_y += y;
    sum_xy += x * y;
    sum_xx += x * x;
  }

  SummarizedStats& operator+=(const SummarizedStats& o) noexcept {
    n += o.n;
    sum_x += o.sum_x;
    sum_y += o.sum_y;
    sum_xy += o.sum_xy;
    sum_xx += o.sum_xx;
    return *this;
  }

  friend bool operator==(const SummarizedStats&, const SummarizedStats&) = default;
};

SummarizedStats merge_stats(const SummarizedStats& a, const SummarizedStats& b) noexcept;

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t n_points = 0;
  std::size_t x_start = 0;
  std::size_t x_end = 0;

  double at(double x) const noexcept { return intercept + slope * x; }
  friend bool operator==(const LineFit&, const LineFit&) = default;
};

/// Throws Error(SegmentTooSmall) when n < 2 and Error(DegenerateX) when all x
/// coincide.
LineFit fit_line(const SummarizedStats& stats);

/// Non-throwing variant for hot loops. Returns nullopt where fit_line throws.
std::optional<LineFit> try_fit_line(const SummarizedStats& stats) noexcept;

/// Slope only; NaN when the fit is undefined.
double fit_slope(const SummarizedStats& stats) noexcept;

}  // namespace trendseek
