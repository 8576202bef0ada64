#pragma once

#include <random>
#include <string>

#include "trendseek/algebra.hpp"

namespace gen {

// Random ASTs that pass validate_ast. Same-kind nesting and double negation are
// generated on purpose so normalization has work to do.
class AstGenerator {
 public:
  explicit AstGenerator(std::uint64_t seed) : rng_(seed) {}

  trendseek::ShapeQuery next() {
    for (;;) {
      auto q = node(0);
      if (trendseek::validate_ast(q).ok) return q;
    }
  }

 private:
  using Q = trendseek::ShapeQuery;

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  double num() {
    switch (pick(3)) {
      case 0: return static_cast<double>(pick(200));
      case 1: return std::uniform_real_distribution<double>(-100.0, 100.0)(rng_);
      default: return static_cast<double>(pick(2000)) / 8.0 - 50.0;
    }
  }

  Q node(int depth) {
    if (depth >= 4 || coin(0.35 + 0.15 * depth)) return Q::seg(segment(depth));
    const std::size_t kind = pick(4);
    if (kind == 3) return Q::negate(node(depth + 1));
    std::vector<Q> kids;
    const std::size_t n = 2 + pick(3);
    for (std::size_t i = 0; i < n; ++i) kids.push_back(node(depth + 1));
    if (kind == 0) return Q::concat(std::move(kids));
    if (kind == 1) return Q::all_of(std::move(kids));
    return Q::any_of(std::move(kids));
  }

  trendseek::ShapeSegment segment(int depth) {
    using trendseek::Pattern;
    using trendseek::PatternKind;
    trendseek::ShapeSegment s;
    if (coin(0.08)) {
      std::vector<trendseek::Point> pts;
      double x = num();
      for (std::size_t i = 0, n = 2 + pick(5); i < n; ++i) {
        pts.push_back({x, num()});
        x += 0.5 + static_cast<double>(pick(20));
      }
      s.pattern = Pattern::sketch_of(std::move(pts));
      return s;
    }
    auto& loc = s.location;
    if (coin(0.1)) {
      loc.iterator_width = 1 + pick(30);
    } else {
      if (coin(0.3)) loc.x_start = num();
      if (coin(0.3)) loc.x_end = loc.x_start ? *loc.x_start + 1.0 + pick(50) : num();
    }
    if (coin(0.15)) loc.y_start = num();
    if (coin(0.15)) loc.y_end = num();

    switch (pick(10)) {
      case 0: s.pattern = Pattern::up(); break;
      case 1: s.pattern = Pattern::down(); break;
      case 2: s.pattern = Pattern::flat(); break;
      case 3: s.pattern = Pattern::any(); break;
      case 4: s.pattern = Pattern::empty(); break;
      case 5: s.pattern = Pattern::theta(std::uniform_real_distribution<double>(-89.0, 89.0)(rng_)); break;
      case 6: {
        trendseek::PositionRef ref;
        const std::size_t mode = pick(3);
        ref.mode = mode == 0   ? trendseek::PositionRef::Mode::Absolute
                   : mode == 1 ? trendseek::PositionRef::Mode::Previous
                               : trendseek::PositionRef::Mode::Next;
        if (mode == 0) ref.index = pick(4);
        s.pattern = Pattern::position(ref);
        break;
      }
      case 7:
        if (depth < 3) {
          s.pattern = Pattern::nested_query(node(depth + 2));
        } else {
          s.pattern = Pattern::up();
        }
        break;
      case 8: s.pattern = Pattern::user_defined(coin() ? "spike" : "my_dip2"); break;
      default: s.pattern = coin() ? Pattern::up() : Pattern::down(); break;
    }

    auto& m = s.modifier;
    const auto kind = s.pattern.kind;
    if (s.pattern.is_slope_pattern() && coin(0.25)) {
      trendseek::Quantifier q;
      q.min = pick(4);
      if (coin(0.7)) q.max = q.min + pick(4);
      m.quantifier = q;
    }
    if ((kind == PatternKind::Up || kind == PatternKind::Down || kind == PatternKind::PositionRef) &&
        coin(0.3)) {
      m.comparator = static_cast<trendseek::Comparator>(pick(5));
      if (kind == PatternKind::PositionRef &&
          (*m.comparator == trendseek::Comparator::Less ||
           *m.comparator == trendseek::Comparator::Greater) &&
          coin()) {
        m.multiplier = 0.25 * static_cast<double>(1 + pick(16));
      }
    }
    return s;
  }

  std::mt19937_64 rng_;
};

}  // namespace gen
