#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ast_gen.hpp"
#include "oracles.hpp"
#include "trendseek/corpus.hpp"
#include "trendseek/engines.hpp"
#include "trendseek/errors.hpp"
#include "trendseek/executor.hpp"
#include "trendseek/parser.hpp"
#include "trendseek/scoring.hpp"
#include "trendseek/stats.hpp"

using namespace trendseek;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

CompiledQuery compile(const char* text) { return CompiledQuery(parse_shapequery(text)); }

EngineConfig engine(EngineKind kind, std::size_t threads = 1) {
  EngineConfig c;
  c.engine = kind;
  c.threads = threads;
  return c;
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  const char* queries[] = {"u>>d", "u>>d>>u", "(u|d)>>f"};
  std::size_t cases = 0, mismatches = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    for (const char* text : queries) {
      const auto q = compile(text);
      const std::size_t len = 4 + rng() % 9;
      const auto viz = make_viz("r", oracle::random_series(rng, len), rep % 2 == 0);
      const auto dp = solve_dp(q, viz);
      const auto ex = enumerate_exhaustive(q, viz);
      worst = std::max(worst, std::fabs(dp.total - ex.total));
      if (std::fabs(dp.total - ex.total) > 1e-9 || dp.breakpoints != ex.breakpoints) ++mismatches;
      ++cases;
    }
  }
  const double secs = seconds_since(t0);
  return {cases >= 200 && mismatches == 0 && secs < 10.0,
          format("%zu cases, %zu mismatches, max |dtotal| %.2e, %.2fs", cases, mismatches, worst,
                 secs)};
}

Outcome additivity() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(0.0, 100.0), uy(-10.0, 10.0);
  double worst = 0.0;
  for (int set = 0; set < 1000; ++set) {
    const std::size_t n = 4 + rng() % 197;
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = ux(rng);
      ys[i] = uy(rng) + 0.3 * xs[i];
    }
    const std::size_t cut = 2 + rng() % (n - 3);
    SummarizedStats left, right;
    for (std::size_t i = 0; i < n; ++i) (i < cut ? left : right).add(xs[i], ys[i]);
    const auto merged = fit_line(merge_stats(left, right));
    worst = std::max(worst, std::fabs(merged.slope - oracle::fit(xs, ys).slope));
  }
  return {worst <= 1e-9, format("1000 sets, max |dslope| %.2e", worst)};
}

Outcome scoring_tables() {
  const double slopes[] = {-1e6, -20.0, -5.0, -2.0, -1.0, -0.75, -0.5, -0.25, -0.1, -1e-3,
                           0.0,  1e-3,  0.1,  0.25, 0.5,  0.75,  1.0,  2.0,   5.0,  1e6};
  const double angles[] = {-67.5, -45.0, -22.5, 0.0, 22.5, 45.0, 67.5, 89.0};
  const double pi = std::numbers::pi;
  auto theta = [&](double s, double deg) {
    const double r = deg * pi / 180.0;
    return std::clamp(1.0 - 2.0 * std::fabs(std::atan(s) - r) / (pi / 2.0 + std::fabs(r)), -1.0,
                      1.0);
  };
  double worst = 0.0;
  auto check = [&](const Pattern& p, double s, double expected) {
    LineFit fit;
    fit.slope = s;
    fit.n_points = 2;
    worst = std::max(worst, std::fabs(score_pattern(p, fit) - expected));
  };
  for (double s : slopes) {
    check(Pattern::up(), s, oracle::up(s));
    check(Pattern::down(), s, oracle::down(s));
    check(Pattern::flat(), s, oracle::flat(s));
    check(Pattern::any(), s, 1.0);
    check(Pattern::empty(), s, -1.0);
    for (double a : angles) check(Pattern::theta(a), s, theta(s, a));
  }
  LineFit one;
  one.slope = 1.0;
  const bool anchors = score_pattern(Pattern::up(), one) == 0.5 &&
                       score_pattern(Pattern::flat(), LineFit{}) == 1.0 &&
                       std::fabs(score_pattern(Pattern::theta(45.0), one) - 1.0) <= 1e-12;

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  bool ops = true;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> xs(1 + rng() % 5);
    for (auto& x : xs) x = u(rng);
    double sum = 0.0;
    for (double x : xs) sum += x;
    ops = ops && score_operator(NodeKind::Concat, xs) == sum / static_cast<double>(xs.size());
    ops = ops && score_operator(NodeKind::And, xs) == *std::min_element(xs.begin(), xs.end());
    ops = ops && score_operator(NodeKind::Or, xs) == *std::max_element(xs.begin(), xs.end());
    const std::vector<double> single{xs[0]};
    ops = ops && score_operator(NodeKind::Not, single) == -xs[0];
  }
  return {worst <= 1e-12 && anchors && ops,
          format("20 slopes x 13 patterns, max |d| %.2e; operators %s", worst,
                 ops ? "exact" : "MISMATCH")};
}

std::set<std::string> top_ids(const EngineRun& run) {
  std::set<std::string> ids;
  for (const auto& r : run.top) ids.insert(r.id);
  return ids;
}

std::size_t overlap(const EngineRun& a, const EngineRun& b) {
  const auto ia = top_ids(a), ib = top_ids(b);
  std::size_t n = 0;
  for (const auto& id : ia) n += ib.count(id);
  return n;
}

double top20_overlap(double noise, std::uint64_t seed) {
  CorpusOptions opts;
  opts.count = 200;
  opts.length = 256;
  opts.seed = seed;
  opts.noise = noise;
  const auto vizs = planted_corpus(opts, 3);
  const auto q = compile("u>>d>>u");
  const auto dp = rank_vizs(q, vizs, 20, engine(EngineKind::Dp, 0));
  const auto st = rank_vizs(q, vizs, 20, engine(EngineKind::SegTree, 0));
  return static_cast<double>(overlap(dp, st)) / 20.0;
}

Outcome segtree_accuracy() {
  const auto t0 = Clock::now();
  const double acc = top20_overlap(CorpusOptions{}.noise, 1);
  const double secs = seconds_since(t0);
  const double noisy = top20_overlap(0.15, 1);
  return {acc >= 0.75 && secs < 60.0,
          format("top-20 overlap %.2f at noise %.2f, %.1fs (noise 0.15: %.2f)", acc,
                 CorpusOptions{}.noise, secs, noisy)};
}

double time_engine(const CompiledQuery& q, const std::vector<CandidateViz>& vizs, EngineKind kind,
                   double min_seconds) {
  const auto t0 = Clock::now();
  std::size_t reps = 0;
  do {
    for (const auto& viz : vizs) (void)solve_one(q, viz, kind);
    ++reps;
  } while (seconds_since(t0) < min_seconds);
  return seconds_since(t0) / static_cast<double>(reps);
}

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
  }
  return oracle::fit(lx, ly).slope;
}

Outcome runtime_separation() {
  const auto q = compile("u>>d>>u>>d");
  CorpusOptions opts;
  opts.count = 100;
  opts.length = 900;
  opts.seed = 2;
  const auto vizs = planted_corpus(opts, 4);
  auto t0 = Clock::now();
  (void)rank_vizs(q, vizs, 10, engine(EngineKind::Dp));
  const double dp_secs = seconds_since(t0);
  t0 = Clock::now();
  (void)rank_vizs(q, vizs, 10, engine(EngineKind::SegTree));
  const double st_secs = seconds_since(t0);

  const std::vector<double> sizes{128, 256, 512, 1024, 2048};
  std::vector<double> dp_t, st_t;
  for (double b : sizes) {
    opts.count = 3;
    opts.length = static_cast<std::size_t>(b);
    opts.seed = 3;
    const auto sample = planted_corpus(opts, 4);
    dp_t.push_back(time_engine(q, sample, EngineKind::Dp, 0.2));
    st_t.push_back(time_engine(q, sample, EngineKind::SegTree, 0.2));
  }
  const double dp_exp = loglog_slope(sizes, dp_t);
  const double st_exp = loglog_slope(sizes, st_t);
  return {st_secs <= 0.5 * dp_secs && dp_exp >= 1.7 && st_exp <= 1.3,
          format("B=900: dp %.2fs, segtree %.2fs (%.1fx); exponents dp %.2f, segtree %.2f",
                 dp_secs, st_secs, dp_secs / st_secs, dp_exp, st_exp)};
}

bool same_top(const EngineRun& a, const EngineRun& b) {
  if (a.top.size() != b.top.size()) return false;
  for (std::size_t i = 0; i < a.top.size(); ++i) {
    if (a.top[i].id != b.top[i].id) return false;
    if (std::fabs(a.top[i].result.total - b.top[i].result.total) > 1e-9) return false;
  }
  return true;
}

Outcome pruning() {
  std::size_t runs = 0, differ = 0;
  const char* queries[] = {"u>>d>>u", "d>>u", "u>>f>>d>>u"};
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    CorpusOptions opts;
    opts.count = 60;
    opts.length = 128;
    opts.seed = seed;
    std::vector<std::vector<CandidateViz>> corpora{random_walk_corpus(opts), planted_corpus(opts, 3),
                                                   needle_corpus(opts)};
    for (const auto& vizs : corpora) {
      for (const char* text : queries) {
        const auto q = compile(text);
        for (std::size_t k : {1, 5, 10}) {
          const auto plain = rank_vizs(q, vizs, k, engine(EngineKind::SegTree));
          for (std::size_t threads : {1, 8}) {
            auto cfg = engine(EngineKind::SegTreePrune, threads);
            cfg.seed = seed;
            differ += !same_top(plain, prune_run(q, vizs, k, cfg));
            ++runs;
          }
        }
      }
    }
  }

  CorpusOptions opts;
  opts.count = 100;
  opts.length = 128;
  opts.noise = 0.005;
  opts.seed = 7;
  const auto needle = needle_corpus(opts);
  const auto q = compile("u>>d>>u");
  const auto run = prune_run(q, needle, 1, engine(EngineKind::SegTreePrune));
  const double share = static_cast<double>(run.prune.reached_root) / static_cast<double>(needle.size());
  const bool found = !run.top.empty() && run.top[0].id == "needle";
  return {differ == 0 && found && share <= 0.5,
          format("%zu runs, %zu differ; needle corpus reached root %zu/%zu (%.0f%%), pruned %zu",
                 runs, differ, run.prune.reached_root, needle.size(), 100.0 * share,
                 run.prune.pruned)};
}

Outcome bounds_soundness() {
  CorpusOptions opts;
  opts.count = 25;
  opts.length = 150;
  opts.seed = 8;
  auto vizs = random_walk_corpus(opts);
  const auto planted = planted_corpus(opts, 3);
  vizs.insert(vizs.end(), planted.begin(), planted.end());
  std::size_t checks = 0, violations = 0;
  for (const char* text : {"u>>d>>u", "(u&f)>>d", "!d>>u"}) {
    const auto q = compile(text);
    for (const auto& viz : vizs) {
      const double total = solve_segment_tree(q, viz).total;
      SegmentTreeSolver solver(q, viz);
      for (;;) {
        for (std::size_t limit : {std::size_t{0}, std::size_t{32}}) {
          const auto b = solver.bounds(limit);
          violations += !(b.lower <= total && total <= b.upper);
          ++checks;
        }
        if (solver.done()) break;
        solver.advance(1);
      }
    }
  }
  return {violations == 0 && checks > 0,
          format("%zu vizs, %zu level checks, %zu violations", vizs.size(), checks, violations)};
}

Outcome parser_roundtrip() {
  gen::AstGenerator g(99);
  std::size_t bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto ast = g.next();
    const auto text = format_shapequery(ast);
    try {
      if (!(parse_shapequery(text) == normalize_ast(ast))) ++bad;
    } catch (const Error&) {
      ++bad;
    }
  }

  std::mt19937_64 rng(4);
  const std::string alphabet = "[]()>|&!$.,:=+-*?{}0123456789 pxysemvudfanyt_";
  std::size_t crashes = 0;
  for (int i = 0; i < 100000; ++i) {
    std::string input(rng() % 1025, '\0');
    const bool structured = i % 2 == 1;
    for (auto& ch : input) {
      ch = structured ? alphabet[rng() % alphabet.size()] : static_cast<char>(rng() % 256);
    }
    try {
      (void)parse_shapequery(input);
    } catch (const Error&) {
    } catch (...) {
      ++crashes;
    }
  }
  return {bad == 0 && crashes == 0,
          format("1000 ASTs, %zu mismatches; 100000 fuzz inputs, %zu non-Error exceptions", bad,
                 crashes)};
}

Outcome pushdown() {
  CorpusOptions opts;
  opts.count = 40;
  opts.length = 200;
  opts.seed = 12;
  const auto ds = corpus_dataset(planted_corpus(opts, 3));
  VisualSpec spec;
  spec.z_attr = "z";
  spec.x_attr = "x";
  spec.y_attr = "y";
  spec.bin_width = 2.0;
  const auto ast = parse_shapequery("[p=up,x.s=50,x.e=100]>>d>>u");
  auto cfg = engine(EngineKind::Dp);
  const auto planned = run_query(ds, spec, ast, 10, cfg, {true});
  const auto plain = run_query(ds, spec, ast, 10, cfg, {false});
  const double min_x = planned.stats.min_materialized_x.value_or(-1.0);
  bool same = planned.results.size() == plain.results.size();
  for (std::size_t i = 0; same && i < plain.results.size(); ++i) {
    const auto& a = planned.results[i];
    const auto& b = plain.results[i];
    same = a.viz_id == b.viz_id && a.total == b.total && a.breakpoint_x == b.breakpoint_x;
  }
  return {min_x >= 50.0 - *spec.bin_width && same,
          format("min materialized x %.1f (bound %.1f); %zu vs %zu bins; top-10 %s", min_x,
                 50.0 - *spec.bin_width, planned.stats.bins_materialized,
                 plain.stats.bins_materialized, same ? "identical" : "DIFFERENT")};
}

Outcome dtw() {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::size_t pairs = 0, mismatches = 0;
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::size_t m = 1; m <= 8; ++m) {
      for (int rep = 0; rep < 5; ++rep) {
        std::vector<double> a(n), b(m);
        for (auto& v : a) v = u(rng);
        for (auto& v : b) v = u(rng);
        mismatches += dtw_distance(a, b) != oracle::dtw_bruteforce(a, b);
        ++pairs;
      }
    }
  }
  return {mismatches == 0, format("%zu pairs, lengths 1..8, %zu mismatches", pairs, mismatches)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"additivity exactness", additivity},
      {"scoring tables", scoring_tables},
      {"segment tree accuracy", segtree_accuracy},
      {"runtime separation", runtime_separation},
      {"pruning losslessness", pruning},
      {"bounds soundness", bounds_soundness},
      {"parser round-trip", parser_roundtrip},
      {"push-down", pushdown},
      {"dtw baseline", dtw},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
