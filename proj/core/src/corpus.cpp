#include "trendseek/corpus.hpp"

#include <cstdio>

namespace trendseek {

std::string corpus_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "viz-%04zu", i);
  return buf;
}

std::vector<double> planted_series(std::span<const Trend> runs, std::size_t length, double noise,
                                   std::mt19937_64& rng) {
  std::vector<double> ys(length, 0.0);
  if (runs.empty() || length == 0) return ys;
  std::normal_distribution<double> gauss(0.0, noise);
  double level = 0.0;
  for (std::size_t i = 0; i < length; ++i) {
    const std::size_t run = std::min(runs.size() - 1, i * runs.size() / length);
    const std::size_t run_len = length / runs.size();
    const double step = run_len ? 1.0 / static_cast<double>(run_len) : 0.0;
    if (i > 0) {
      if (runs[run] == Trend::Up) level += step;
      if (runs[run] == Trend::Down) level -= step;
    }
    ys[i] = level + gauss(rng);
  }
  return ys;
}

std::vector<CandidateViz> random_walk_corpus(const CorpusOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<CandidateViz> out;
  out.reserve(options.count);
  for (std::size_t v = 0; v < options.count; ++v) {
    std::vector<double> ys(options.length);
    double y = 0.0;
    for (auto& value : ys) {
      y += gauss(rng);
      value = y;
    }
    out.push_back(make_viz(corpus_id(v), ys, true));
  }
  return out;
}

std::vector<CandidateViz> planted_corpus(const CorpusOptions& options, std::size_t runs) {
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<int> pick(0, 2);
  std::vector<CandidateViz> out;
  out.reserve(options.count);
  for (std::size_t v = 0; v < options.count; ++v) {
    std::vector<Trend> trends(runs);
    for (auto& t : trends) t = static_cast<Trend>(pick(rng));
    out.push_back(make_viz(corpus_id(v), planted_series(trends, options.length, options.noise, rng),
                           true));
  }
  return out;
}

std::vector<CandidateViz> needle_corpus(const CorpusOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::vector<CandidateViz> out;
  out.reserve(options.count);
  const std::vector<Trend> needle{Trend::Up, Trend::Down, Trend::Up};
  out.push_back(make_viz("needle", planted_series(needle, options.length, options.noise, rng), true));
  std::bernoulli_distribution coin(0.5);
  for (std::size_t v = 1; v < options.count; ++v) {
    const std::vector<Trend> mono{coin(rng) ? Trend::Up : Trend::Down};
    out.push_back(
        make_viz(corpus_id(v), planted_series(mono, options.length, options.noise, rng), true));
  }
  return out;
}

Dataset corpus_dataset(std::span<const CandidateViz> vizs, std::string name) {
  Dataset ds;
  ds.name = std::move(name);
  Column z{"z", ColumnKind::Categorical, {}, {}};
  Column x{"x", ColumnKind::Numeric, {}, {}};
  Column y{"y", ColumnKind::Numeric, {}, {}};
  for (const auto& viz : vizs) {
    for (std::size_t i = 0; i < viz.size(); ++i) {
      z.text.push_back(viz.id);
      x.values.push_back(viz.bins[i].x);
      y.values.push_back(viz.bins[i].y);
    }
  }
  ds.row_count = x.values.size();
  ds.columns = {std::move(z), std::move(x), std::move(y)};
  return ds;
}

}  // namespace trendseek
