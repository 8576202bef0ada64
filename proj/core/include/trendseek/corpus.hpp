#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "trendseek/ingest.hpp"

namespace trendseek {

// Seeded synthetic trendline collections for tests and benchmarks.

enum class Trend { Up, Down, Flat };

struct CorpusOptions {
  std::size_t count = 100;
  std::size_t length = 256;
  std::uint64_t seed = 0;
  double noise = 0.02;  // stddev of the additive noise, relative to one run's rise
};

/// Runs of roughly equal length with the given trends plus Gaussian noise.
std::vector<double> planted_series(std::span<const Trend> runs, std::size_t length, double noise,
                                   std::mt19937_64& rng);

/// Gaussian random walks.
std::vector<CandidateViz> random_walk_corpus(const CorpusOptions& options);

/// Every viz gets `runs` trends drawn uniformly from {up, down, flat}.
std::vector<CandidateViz> planted_corpus(const CorpusOptions& options, std::size_t runs);

/// One planted up-down-up viz with id "needle" among count - 1 monotone noisy
/// vizs.
std::vector<CandidateViz> needle_corpus(const CorpusOptions& options);

/// Corpus as a three-column dataset (z, x, y) so it can run through the
/// executor.
Dataset corpus_dataset(std::span<const CandidateViz> vizs, std::string name = "corpus");

std::string corpus_id(std::size_t i);

}  // namespace trendseek
