#pragma once

// Hypothesize-and-verify driver shared by the rigid, PnP and fundamental
// matrix estimators.
//
// Every iteration owns a generator seeded from (seed, iteration index), so a
// hypothesis does not depend on which worker evaluates it. Iterations run in
// fixed-size batches; within a batch hypotheses are scored in parallel and
// reduced in iteration order (more inliers wins, ties go to the lower
// iteration). The adaptive stopping test runs between batches. Serial and
// parallel runs therefore produce identical results.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "plenreg/errors.hpp"
#include "plenreg/parallel.hpp"

namespace plenreg {

struct RansacOptions {
  int max_iterations = 2000;
  double confidence = 0.999;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  int batch_size = 16;
  // Redraws allowed per iteration when the minimal solver reports a
  // degenerate sample.
  int max_resamples = 50;
};

template <typename Model>
struct RansacOutcome {
  std::optional<Model> model;
  std::vector<int> inliers;
  int iterations = 0;
  int best_iteration = -1;
  int degenerate_samples = 0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Unbiased integer in [0, n) from a 64-bit engine; independent of the
// standard library's distribution implementation.
inline std::uint64_t bounded_index(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r = rng();
  while (r >= limit) r = rng();
  return r % n;
}

// k distinct indices from [0, n) by partial Fisher-Yates.
inline std::vector<int> draw_sample(std::mt19937_64& rng, int n, int k) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(i) +
                   bounded_index(rng, static_cast<std::uint64_t>(n - i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

inline int required_iterations(double inlier_ratio, int sample_size, double confidence) {
  if (inlier_ratio >= 1.0) return 0;
  if (inlier_ratio <= 0.0) return std::numeric_limits<int>::max();
  const double p_good = std::pow(inlier_ratio, sample_size);
  if (p_good <= std::numeric_limits<double>::min()) return std::numeric_limits<int>::max();
  const double n = std::log(1.0 - confidence) / std::log1p(-p_good);
  if (!std::isfinite(n) || n > 1e9) return std::numeric_limits<int>::max();
  return static_cast<int>(std::ceil(n));
}

// solve(sample) returns std::nullopt for a degenerate sample.
// score(model) returns the indices of the data consistent with the model.
template <typename Model, typename Solve, typename Score>
RansacOutcome<Model> run_ransac(int n_data, int sample_size, const RansacOptions& options,
                                Solve&& solve, Score&& score) {
  RansacOutcome<Model> out;
  if (n_data < sample_size) return out;

  struct Hypothesis {
    std::optional<Model> model;
    std::vector<int> inliers;
    int degenerate = 0;
  };

  int required = options.max_iterations;
  int processed = 0;
  while (processed < std::min(required, options.max_iterations)) {
    const int batch =
        std::min(options.batch_size, options.max_iterations - processed);
    std::vector<Hypothesis> hyps(static_cast<std::size_t>(batch));
    parallel_for(hyps.size(), options.threads, [&](std::size_t b) {
      const auto iteration = static_cast<std::uint64_t>(processed) + b;
      std::mt19937_64 rng(splitmix64(options.seed ^ splitmix64(iteration)));
      Hypothesis& h = hyps[b];
      for (int attempt = 0; attempt <= options.max_resamples; ++attempt) {
        const std::vector<int> sample = draw_sample(rng, n_data, sample_size);
        h.model = solve(std::span<const int>(sample));
        if (h.model) break;
        ++h.degenerate;
      }
      if (h.model) h.inliers = score(*h.model);
    });

    for (int b = 0; b < batch; ++b) {
      Hypothesis& h = hyps[static_cast<std::size_t>(b)];
      out.degenerate_samples += h.degenerate;
      if (h.model && (!out.model || h.inliers.size() > out.inliers.size())) {
        out.model = std::move(h.model);
        out.inliers = std::move(h.inliers);
        out.best_iteration = processed + b;
      }
    }
    processed += batch;
    if (out.model) {
      required = required_iterations(
          static_cast<double>(out.inliers.size()) / static_cast<double>(n_data),
          sample_size, options.confidence);
    }
  }
  out.iterations = processed;
  return out;
}

}  // namespace plenreg
