#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trendseek/algebra.hpp"
#include "trendseek/ingest.hpp"
#include "trendseek/stats.hpp"

namespace trendseek {

double score_up(double slope) noexcept;
double score_down(double slope) noexcept;
double score_flat(double slope) noexcept;
double score_theta(double slope, double angle_deg) noexcept;

/// Pattern must be Up, Down, Flat, Theta, Any or Empty; other kinds throw
/// Error(InvalidArgument).
double score_pattern(const Pattern& pattern, const LineFit& fit);

/// Score of a slope pattern with an optional sharpness comparator applied.
/// Up/Down with > or >> score as Theta(+-67.5), with < or << as Theta(+-22.5).
double score_slope_pattern(const Pattern& pattern, const std::optional<Comparator>& sharpness,
                           double slope) noexcept;

/// Concat = mean, And = min, Or = max, Not = negation of its single child.
double score_operator(NodeKind kind, std::span<const double> child_scores);

/// Splits bins [first, last] into every sub-segment of at least two bins,
/// keeps a greedy non-overlapping selection of those scoring above
/// `threshold`, and checks the count against the quantifier.
double score_quantifier(const CandidateViz& viz, std::size_t first, std::size_t last,
                        const Pattern& pattern, const Quantifier& quantifier, double threshold,
                        const std::optional<Comparator>& sharpness = std::nullopt);

enum class SketchMetric { Euclid, Dtw };

double euclid_distance(std::span<const double> a, std::span<const double> b);

/// Classic DTW with |a_i - b_j| local cost. With a band w, cells with
/// |i - j| > max(w, |len(a) - len(b)|) are excluded.
double dtw_distance(std::span<const double> a, std::span<const double> b,
                    std::optional<std::size_t> band = std::nullopt);

double series_distance(std::span<const double> a, std::span<const double> b, SketchMetric metric);

/// Linear interpolation of the sketch at each x (clamped at the ends).
std::vector<double> resample_sketch(std::span<const Point> sketch, std::span<const double> xs);

/// Maps a raw distance to [-1, 1] across a candidate set; equal extremes map to 1.
double normalize_distance(double d, double d_min, double d_max) noexcept;

struct SketchMatch {
  double distance = 0.0;
  std::size_t first = 0;
  std::size_t last = 0;
};

/// Raw distance between the z-normalized sketch and the z-normalized bins
/// inside the sketch's x extent. Throws Error(EmptySketch) when the sketch has
/// fewer than two points and Error(DegenerateViz) when fewer than two bins
/// fall inside the extent.
SketchMatch sketch_distance(std::span<const Point> sketch, const CandidateViz& viz,
                            SketchMetric metric);

/// Phase two of sketch scoring: normalizes raw distances across candidates.
std::vector<double> normalize_distances(std::span<const double> distances);

struct VisualSegment {
  const CandidateViz* viz = nullptr;
  std::size_t first = 0;
  std::size_t last = 0;
  LineFit fit;
};

using UdpFunction = std::function<double(const VisualSegment&)>;

/// Process-wide registry of user-defined patterns; thread safe.
void register_udp(const std::string& name, UdpFunction fn);
bool unregister_udp(const std::string& name);
std::optional<UdpFunction> find_udp(const std::string& name);

struct ScoreContext {
  /// Fit of the region each ShapeSegment (preorder index) was matched to.
  /// Missing entries make position references score optimistically.
  std::span<const std::optional<LineFit>> sibling_fits;
  double quantifier_threshold = 0.0;
  double y_tolerance = 0.05;  // fraction of the viz y-range
};

/// Location gate, then pattern score. Never throws for data-dependent
/// failures: a segment that cannot be fitted scores -1.
double score_shape_segment(const ShapeSegment& segment, std::size_t self_index,
                           const CandidateViz& viz, std::size_t first, std::size_t last,
                           const ScoreContext& ctx);

inline double clamp_score(double s) noexcept {
  if (!(s >= -1.0)) return -1.0;
  return s > 1.0 ? 1.0 : s;
}

}  // namespace trendseek
