#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>

#include "parallel.hpp"
#include "trendseek/engines.hpp"
#include "trendseek/errors.hpp"

namespace trendseek {

namespace {

constexpr double kNoBound = -std::numeric_limits<double>::infinity();

CandidateViz subsample(const CandidateViz& viz, std::size_t points) {
  if (points < 2 || viz.size() <= points) return viz;
  CandidateViz out;
  out.id = viz.id;
  out.bin_width = viz.bin_width;
  out.covered = viz.covered;
  out.bins.reserve(points);
  const double step = static_cast<double>(viz.size() - 1) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const auto at = static_cast<std::size_t>(std::lround(static_cast<double>(i) * step));
    out.bins.push_back(viz.bins[std::min(at, viz.size() - 1)]);
  }
  reindex(out, false);
  return out;
}

bool fatal_code(ErrorCode code) {
  return code == ErrorCode::TooLarge || code == ErrorCode::InvalidArgument;
}

// Best k results seen so far; lower_bound() is the k-th best total.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) {}

  void add(RankedViz r) {
    std::lock_guard lock(mutex_);
    items_.push_back(std::move(r));
    std::sort(items_.begin(), items_.end(), ranks_before);
    if (items_.size() > k_) items_.resize(k_);
    if (k_ > 0 && items_.size() == k_) bound_.store(items_.back().result.total);
  }

  double lower_bound() const { return bound_.load(); }

  std::vector<RankedViz> take() {
    std::lock_guard lock(mutex_);
    return std::move(items_);
  }

 private:
  std::size_t k_;
  std::mutex mutex_;
  std::vector<RankedViz> items_;
  std::atomic<double> bound_{kNoBound};
};

}  // namespace

EngineRun prune_run(const CompiledQuery& query, std::span<const CandidateViz> vizs, std::size_t k,
                    const EngineConfig& config) {
  EngineRun run;
  run.prune.vizs = vizs.size();
  if (vizs.empty() || k == 0) return run;

  std::vector<std::string> errors(vizs.size());
  std::atomic<std::size_t> infeasible{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  auto guarded = [&](std::size_t i, auto&& body) {
    try {
      body();
    } catch (const Error& e) {
      if (fatal_code(e.code())) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
      } else {
        if (e.code() == ErrorCode::InfeasibleSegmentation) infeasible.fetch_add(1);
        errors[i] = "skipped '" + vizs[i].id + "': " + e.what();
      }
    } catch (...) {
      std::lock_guard lock(fatal_mutex);
      if (!fatal) fatal = std::current_exception();
    }
  };

  TopK top(k);
  std::atomic<std::size_t> reached{0};
  std::atomic<std::size_t> pruned{0};
  std::vector<char> handled(vizs.size(), 0);

  // Stage 1: estimate a sample on a coarse grid, then solve its best members
  // exactly. The k-th best exact total is a valid lower bound.
  std::vector<std::size_t> order(vizs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> sample;
  std::mt19937_64 rng(config.seed);
  std::sample(order.begin(), order.end(), std::back_inserter(sample),
              std::min(config.prune_sample, vizs.size()), rng);
  std::vector<double> estimate(sample.size(), kNoBound);
  detail::parallel_for(sample.size(), config.threads, [&](std::size_t s) {
    try {
      estimate[s] = solve_dp(query, subsample(vizs[sample[s]], config.prune_points)).total;
    } catch (...) {
      // A coarse grid can be infeasible where the full one is not.
    }
  });
  std::vector<std::size_t> by_estimate(sample.size());
  std::iota(by_estimate.begin(), by_estimate.end(), std::size_t{0});
  std::stable_sort(by_estimate.begin(), by_estimate.end(),
                   [&](std::size_t a, std::size_t b) { return estimate[a] > estimate[b]; });
  if (by_estimate.size() > k) by_estimate.resize(k);
  detail::parallel_for(by_estimate.size(), config.threads, [&](std::size_t s) {
    const std::size_t i = sample[by_estimate[s]];
    handled[i] = 1;
    guarded(i, [&] {
      top.add({i, vizs[i].id, solve_segment_tree(query, vizs[i])});
      reached.fetch_add(1);
    });
  });
  if (fatal) std::rethrow_exception(fatal);
  run.prune.initial_lower_bound = top.lower_bound() == kNoBound ? -1.0 : top.lower_bound();

  // Stage 2: grow every remaining tree a few levels at a time and drop it as
  // soon as its upper bound falls below the running lower bound.
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < vizs.size(); ++i) {
    if (!handled[i]) rest.push_back(i);
  }
  const std::size_t round = std::max<std::size_t>(1, config.prune_round_levels);
  detail::parallel_for(rest.size(), config.threads, [&](std::size_t r) {
    const std::size_t i = rest[r];
    guarded(i, [&] {
      SegmentTreeSolver solver(query, vizs[i]);
      while (true) {
        if (solver.bounds(config.bound_chain_nodes).upper < top.lower_bound()) {
          pruned.fetch_add(1);
          return;
        }
        if (solver.done()) break;
        solver.advance(round);
      }
      top.add({i, vizs[i].id, solver.finish()});
      reached.fetch_add(1);
    });
  });
  if (fatal) std::rethrow_exception(fatal);

  for (const auto& e : errors) {
    if (!e.empty()) run.warnings.push_back(e);
  }
  run.top = top.take();
  run.infeasible = infeasible.load();
  run.prune.reached_root = reached.load();
  run.prune.pruned = pruned.load();
  return run;
}

}  // namespace trendseek
