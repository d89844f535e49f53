#pragma once

#include <span>
#include <string>
#include <vector>

#include "repsel/types.hpp"

namespace repsel {

/// Mean distance from each human to its nearest agent; d_max for an empty
/// agent set.
double representation_gap(std::span<const EmbeddingVector> humans,
                          std::span<const EmbeddingVector> agents, double d_max);

/// Average distance reduction relative to the empty-set baseline:
/// d_max - representation_gap. Zero for an empty agent set, nonnegative for
/// any valid d_max.
double objective_value(std::span<const EmbeddingVector> humans,
                       std::span<const EmbeddingVector> agents, double d_max);

/// Per-human minimum distance to the selected agent set, kept incrementally
/// so each greedy round costs one pass over candidates. Reads (marginal_gain,
/// objective, gap) are const and safe to run concurrently; commit requires
/// exclusive access.
class MinDistCache {
 public:
  MinDistCache(std::vector<EmbeddingVector> humans, double d_max);

  double d_max() const { return d_max_; }
  std::size_t n_humans() const { return humans_.size(); }
  std::size_t n_selected() const { return selected_.size(); }
  const std::vector<std::string>& selected() const { return selected_; }
  double min_dist(std::size_t h) const { return min_dist_[h]; }

  double gap() const { return sum_ / static_cast<double>(humans_.size()); }
  double objective() const { return d_max_ - gap(); }

  /// f(L + candidate) - f(L); never negative; does not mutate the cache.
  double marginal_gain(const EmbeddingVector& candidate) const;

  void commit(const EmbeddingVector& candidate, std::string agent_id);

  /// Recomputes the running sum from the cached minima (drift repair).
  void resync();

 private:
  std::vector<EmbeddingVector> humans_;
  std::vector<double> min_dist_;
  std::vector<std::string> selected_;
  double d_max_;
  double sum_;
};

}  // namespace repsel
