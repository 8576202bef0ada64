#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>

#include "engine_detail.hpp"
#include "trendseek/engines.hpp"
#include "trendseek/errors.hpp"

namespace trendseek {

namespace {

constexpr std::size_t kMaxExprs = 16;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPosInf = std::numeric_limits<double>::infinity();
constexpr double kBoundSlack = 1e-9;

// Bins of one ShapeExpr that fall inside a node. An open left edge excludes
// the node's first bin (the left neighbour owns it), so adjacent portions of
// the same expr never share a bin.
struct Portion {
  SummarizedStats stats;
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;
};

Portion join(const Portion& a, const Portion& b) {
  Portion out;
  out.stats = merge_stats(a.stats, b.stats);
  out.lo = a.lo;
  out.hi = b.hi;
  return out;
}

struct Entry {
  std::uint8_t a = 0;  // first ShapeExpr touching the node
  std::uint8_t c = 0;  // last ShapeExpr touching the node
  bool lo_open = false;
  bool ro_open = false;
  bool has_left = false;   // first expr unfinished; `left` holds its portion
  bool has_right = false;  // last expr (c != a) unfinished; `right` holds its portion
  double interior = 0.0;   // finalized expr scores
  double rank = 0.0;       // interior plus ungated scores of the pending portions
  Portion left;
  Portion right;
  std::array<std::uint32_t, kMaxExprs + 1> bps{};  // bps[j] = first bin of expr j

  const Portion& last_portion() const { return has_right ? right : left; }
};

struct Node {
  std::uint32_t first_step = 0;
  std::uint32_t last_step = 0;
  std::vector<Entry> entries;
};

}  // namespace

struct SegmentTreeSolver::State {
  const CompiledQuery* query = nullptr;
  const CandidateViz* viz = nullptr;
  std::size_t k = 0;
  std::size_t bins = 0;
  std::size_t height = 0;
  std::size_t merges = 0;
  std::vector<std::optional<std::size_t>> pins;
  std::vector<Node> level;
  ScoreBounds envelope;
  std::optional<SegmentedViz> result;

  std::size_t key(const Entry& e) const {
    return ((static_cast<std::size_t>(e.a) * k + e.c) * 2 + e.lo_open) * 2 + e.ro_open;
  }

  // A portion holding only its boundary bin says nothing about the expr yet.
  double provisional(std::size_t expr, const Portion& p) const {
    if (p.stats.n < 2) return 0.0;
    return query->provisional_score(expr, *viz, p.lo, p.hi, p.stats);
  }

  void rank(Entry& e) const {
    e.rank = e.interior;
    if (e.has_left) e.rank += provisional(e.a, e.left);
    if (e.has_right) e.rank += provisional(e.c, e.right);
  }

  bool pin_ok(std::size_t j, std::size_t bin) const { return !pins[j] || *pins[j] == bin; }

  void build_leaves() {
    const std::size_t steps = bins - 1;
    level.resize(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      Node& node = level[t];
      node.first_step = node.last_step = static_cast<std::uint32_t>(t);
      const std::size_t after = bins - 1 - (t + 1);  // steps right of this leaf
      for (std::size_t e = 0; e < k; ++e) {
        for (int lo = 0; lo < 2; ++lo) {
          if (lo == 0) {
            if (e == 0 ? t != 0 : (t < e || !pin_ok(e, t))) continue;
          } else if (t < e + 1) {
            continue;
          }
          for (int ro = 0; ro < 2; ++ro) {
            if (ro == 0) {
              if (e + 1 == k ? after != 0 : (after < k - 1 - e || !pin_ok(e + 1, t + 1))) continue;
            } else if (after < k - e) {
              continue;
            }
            Entry en;
            en.a = en.c = static_cast<std::uint8_t>(e);
            en.lo_open = lo;
            en.ro_open = ro;
            Portion p;
            p.lo = static_cast<std::uint32_t>(lo ? t + 1 : t);
            p.hi = static_cast<std::uint32_t>(t + 1);
            if (!lo) p.stats += viz->bins[t].stats;
            p.stats += viz->bins[t + 1].stats;
            if (!lo) en.bps[e] = static_cast<std::uint32_t>(t);
            if (!ro) en.bps[e + 1] = static_cast<std::uint32_t>(t + 1);
            if (!lo && !ro) {
              en.interior = query->score_expr(e, *viz, t, t + 1, p.stats);
            } else {
              en.has_left = true;
              en.left = p;
            }
            rank(en);
            node.entries.push_back(en);
          }
        }
      }
    }
  }

  Node merge(const Node& L, const Node& R) {
    Node out;
    out.first_step = L.first_step;
    out.last_step = R.last_step;
    std::vector<int> slot(4 * k * k, -1);
    auto offer = [&](Entry&& e) {
      ++merges;
      rank(e);
      int& s = slot[key(e)];
      if (s < 0) {
        s = static_cast<int>(out.entries.size());
        out.entries.push_back(std::move(e));
      } else if (e.rank > out.entries[static_cast<std::size_t>(s)].rank) {
        out.entries[static_cast<std::size_t>(s)] = std::move(e);
      }
    };
    for (const Entry& x : L.entries) {
      for (const Entry& y : R.entries) {
        if (!x.ro_open && !y.lo_open && y.a == x.c + 1) {
          Entry n;
          n.a = x.a;
          n.c = y.c;
          n.lo_open = x.lo_open;
          n.ro_open = y.ro_open;
          n.interior = x.interior + y.interior;
          n.has_left = x.has_left;
          n.left = x.left;
          if (y.has_right) {
            n.has_right = true;
            n.right = y.right;
          } else if (y.has_left) {
            n.has_right = true;
            n.right = y.left;
          }
          n.bps = x.bps;
          for (std::size_t j = y.a; j <= std::min<std::size_t>(y.c + 1, k); ++j) n.bps[j] = y.bps[j];
          n.bps[y.a] = x.bps[y.a];
          offer(std::move(n));
        } else if (x.ro_open && y.lo_open && y.a == x.c) {
          const std::size_t e = x.c;
          const Portion merged = join(x.last_portion(), y.left);
          const bool closed_left = x.a < e || !x.lo_open;
          const bool closed_right = y.c > e || !y.ro_open;
          Entry n;
          n.a = x.a;
          n.c = y.c;
          n.lo_open = x.lo_open;
          n.ro_open = y.ro_open;
          n.interior = x.interior + y.interior;
          if (x.a < e && x.has_left) {
            n.has_left = true;
            n.left = x.left;
          }
          if (y.c > e && y.has_right) {
            n.has_right = true;
            n.right = y.right;
          }
          if (closed_left && closed_right) {
            n.interior += query->score_expr(e, *viz, merged.lo, merged.hi, merged.stats);
          } else if (!closed_left) {
            n.has_left = true;
            n.left = merged;
          } else {
            n.has_right = true;
            n.right = merged;
          }
          n.bps = x.bps;
          for (std::size_t j = e + 1; j <= std::min<std::size_t>(y.c + 1, k); ++j) n.bps[j] = y.bps[j];
          offer(std::move(n));
        }
      }
    }
    return out;
  }

  void step() {
    if (level.size() <= 1) return;
    std::vector<Node> next;
    next.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) next.push_back(merge(level[i], level[i + 1]));
    if (level.size() % 2 == 1) next.push_back(std::move(level.back()));
    level = std::move(next);
    ++height;
  }

  const Entry* root_entry() const {
    if (level.size() != 1) return nullptr;
    for (const auto& e : level[0].entries) {
      if (e.a == 0 && e.c + 1u == k && !e.lo_open && !e.ro_open) return &e;
    }
    return nullptr;
  }

  // Max and min of the total over every chain of kept entries, one per node,
  // that could combine into a root entry. Straddling exprs are scored exactly.
  ScoreBounds chain_bounds() const {
    const std::size_t N = level.size();
    // f[u][a]: best over nodes u.. when node u starts with a closed expr a.
    std::vector<double> fmax((N + 1) * (k + 1), kNegInf);
    std::vector<double> fmin((N + 1) * (k + 1), kPosInf);
    fmax[N * (k + 1) + k] = 0.0;
    fmin[N * (k + 1) + k] = 0.0;
    std::vector<std::vector<double>> hmax(N);
    std::vector<std::vector<double>> hmin(N);
    auto F = [&](std::vector<double>& f, std::size_t u, std::size_t a) -> double& {
      return f[u * (k + 1) + a];
    };
    auto oo_entry = [&](std::size_t v, std::size_t c) -> const Entry* {
      for (const auto& e : level[v].entries) {
        if (e.a == c && e.c == c && e.lo_open && e.ro_open) return &e;
      }
      return nullptr;
    };
    for (std::size_t u = N; u-- > 0;) {
      const auto& entries = level[u].entries;
      hmax[u].assign(entries.size(), kNegInf);
      hmin[u].assign(entries.size(), kPosInf);
      for (std::size_t ei = 0; ei < entries.size(); ++ei) {
        const Entry& E = entries[ei];
        if (!E.ro_open) continue;
        // Skip middle entries; they are folded into the straddle below.
        if (E.lo_open && E.a == E.c) continue;
        const std::size_t c = E.c;
        Portion acc = E.last_portion();
        for (std::size_t v = u + 1; v < N; ++v) {
          const auto& fe = level[v].entries;
          for (std::size_t fi = 0; fi < fe.size(); ++fi) {
            const Entry& G = fe[fi];
            if (!G.lo_open || G.a != c) continue;
            if (G.a == G.c && G.ro_open) continue;
            double rest_max;
            double rest_min;
            if (G.ro_open) {
              rest_max = hmax[v][fi];
              rest_min = hmin[v][fi];
            } else {
              rest_max = F(fmax, v + 1, G.c + 1u);
              rest_min = F(fmin, v + 1, G.c + 1u);
            }
            if (rest_max == kNegInf) continue;
            const Portion whole = join(acc, G.left);
            const double sc = query->score_expr(c, *viz, whole.lo, whole.hi, whole.stats);
            hmax[u][ei] = std::max(hmax[u][ei], sc + G.interior + rest_max);
            hmin[u][ei] = std::min(hmin[u][ei], sc + G.interior + rest_min);
          }
          const Entry* mid = oo_entry(v, c);
          if (!mid) break;
          acc = join(acc, mid->left);
        }
      }
      for (std::size_t ei = 0; ei < entries.size(); ++ei) {
        const Entry& E = entries[ei];
        if (E.lo_open) continue;
        double vmax;
        double vmin;
        if (E.ro_open) {
          vmax = hmax[u][ei];
          vmin = hmin[u][ei];
        } else {
          vmax = F(fmax, u + 1, E.c + 1u);
          vmin = F(fmin, u + 1, E.c + 1u);
        }
        if (vmax == kNegInf) continue;
        F(fmax, u, E.a) = std::max(F(fmax, u, E.a), E.interior + vmax);
        F(fmin, u, E.a) = std::min(F(fmin, u, E.a), E.interior + vmin);
      }
    }
    const double kk = static_cast<double>(k);
    if (F(fmax, 0, 0) == kNegInf) return {1.0, -1.0};
    return {F(fmin, 0, 0) / kk, F(fmax, 0, 0) / kk};
  }
};

SegmentTreeSolver::SegmentTreeSolver(const CompiledQuery& query, const CandidateViz& viz)
    : state_(std::make_unique<State>()) {
  detail::check_solvable(query, viz);
  if (query.k() > kMaxExprs) {
    throw Error(ErrorCode::TooLarge, "the segment tree handles at most " +
                                         std::to_string(kMaxExprs) + " ShapeExprs");
  }
  State& s = *state_;
  s.query = &query;
  s.viz = &viz;
  s.k = query.k();
  s.bins = viz.size();
  s.pins = query.pins(viz);
  double lo = kPosInf;
  double hi = kNegInf;
  for (std::size_t t = 0; t + 1 < viz.size(); ++t) {
    const double d = viz.bins[t + 1].y - viz.bins[t].y;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  s.envelope = query.envelope_bounds(lo, hi);
  s.build_leaves();
}

SegmentTreeSolver::~SegmentTreeSolver() = default;
SegmentTreeSolver::SegmentTreeSolver(SegmentTreeSolver&&) noexcept = default;
SegmentTreeSolver& SegmentTreeSolver::operator=(SegmentTreeSolver&&) noexcept = default;

std::size_t SegmentTreeSolver::level() const noexcept { return state_->height; }
std::size_t SegmentTreeSolver::node_count() const noexcept { return state_->level.size(); }
bool SegmentTreeSolver::done() const noexcept { return state_->level.size() <= 1; }
std::size_t SegmentTreeSolver::merges() const noexcept { return state_->merges; }

void SegmentTreeSolver::advance(std::size_t levels) {
  for (std::size_t i = 0; i < levels && !done(); ++i) state_->step();
}

SegmentedViz SegmentTreeSolver::finish() {
  State& s = *state_;
  if (s.result) return *s.result;
  while (!done()) s.step();
  const Entry* root = s.root_entry();
  if (!root) {
    throw Error(ErrorCode::InfeasibleSegmentation,
                "no segmentation of '" + s.viz->id + "' satisfies the query's locations");
  }
  std::vector<std::size_t> bps(s.k + 1);
  for (std::size_t j = 0; j <= s.k; ++j) bps[j] = root->bps[j];
  bps[0] = 0;
  bps[s.k] = s.bins - 1;
  s.result = evaluate_segmentation(*s.query, *s.viz, bps);
  return *s.result;
}

ScoreBounds SegmentTreeSolver::bounds(std::size_t chain_node_limit) const {
  const State& s = *state_;
  if (s.result) {
    return {clamp_score(s.result->total - kBoundSlack), clamp_score(s.result->total + kBoundSlack)};
  }
  ScoreBounds b = s.envelope;
  const bool exact_chains = !s.query->has_cross_refs();
  if (exact_chains && s.level.size() <= chain_node_limit) {
    const ScoreBounds c = s.chain_bounds();
    if (c.lower > c.upper) return {-1.0, -1.0};  // nothing can reach the root
    b.lower = std::max(b.lower, c.lower);
    b.upper = std::min(b.upper, c.upper);
  }
  return {clamp_score(b.lower - kBoundSlack), clamp_score(b.upper + kBoundSlack)};
}

SegmentedViz solve_segment_tree(const CompiledQuery& query, const CandidateViz& viz) {
  SegmentTreeSolver solver(query, viz);
  return solver.finish();
}

ScoreBounds level_bounds(const CompiledQuery& query, const CandidateViz& viz, std::size_t level,
                         std::size_t chain_node_limit) {
  SegmentTreeSolver solver(query, viz);
  solver.advance(level);
  return solver.bounds(chain_node_limit);
}

}  // namespace trendseek
