#include "trendseek/stats.hpp"

#include <cmath>
#include <limits>

#include "trendseek/errors.hpp"

namespace trendseek {

namespace {

constexpr double kDegenerateEps = 1e-12;

}  // namespace

SummarizedStats merge_stats(const SummarizedStats& a, const SummarizedStats& b) noexcept {
  SummarizedStats out = a;
  out += b;
  return out;
}

double fit_slope(const SummarizedStats& s) noexcept {
  if (s.n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(s.n);
  const double den = n * s.sum_xx - s.sum_x * s.sum_x;
  if (!(den > kDegenerateEps)) return std::numeric_limits<double>::quiet_NaN();
  return (n * s.sum_xy - s.sum_x * s.sum_y) / den;
}

std::optional<LineFit> try_fit_line(const SummarizedStats& s) noexcept {
  const double slope = fit_slope(s);
  if (std::isnan(slope)) return std::nullopt;
  LineFit fit;
  fit.slope = slope;
  fit.intercept = (s.sum_y - slope * s.sum_x) / static_cast<double>(s.n);
  fit.n_points = s.n;
  return fit;
}

LineFit fit_line(const SummarizedStats& s) {
  if (s.n < 2) throw Error(ErrorCode::SegmentTooSmall, "a line fit needs at least two points");
  auto fit = try_fit_line(s);
  if (!fit) throw Error(ErrorCode::DegenerateX, "all x values are equal");
  return *fit;
}

}  // namespace trendseek
