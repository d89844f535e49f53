#pragma once

#include "repsel/types.hpp"

namespace repsel {

/// Synthetic population recipe: cluster-structured humans over a complete
/// task matrix. Desk-scale stand-ins for performance / opinion / semantic
/// response data.
struct GeneratorSpec {
  Scheme scheme = Scheme::binary;
  int n_humans = 30;
  int n_tasks = 40;
  int n_clusters = 3;
  double cluster_spread = 0.05;
  // binary: per-cluster probability of answering a task "1" (skill);
  // defaults to an even spread over (0,1) when empty.
  std::vector<double> cluster_skill;
  // ordinal: per-cluster mean opinion vectors (n_tasks entries each, in
  // [-1,1]); defaults to seeded draws when empty.
  std::vector<std::vector<double>> cluster_means;
  int continuous_dim = 4;  // per-task vector dimension
  double train_fraction = 0.5;
  std::uint64_t seed = 0;
  ContinuousAggregator aggregator = ContinuousAggregator::mean;
  std::optional<double> d_max_override;
};

Population generate_population(const GeneratorSpec& spec);

/// Re-partitions the task set with a seeded uniform draw and rebuilds the
/// per-side embeddings. Train size = round(fraction * |T|), at least one
/// task per side.
Population split_tasks(const Population& pop, double train_fraction, std::uint64_t seed);

/// Same population under a different valid d_max. Any valid constant shifts
/// the objective uniformly, so selections must not change.
Population override_d_max(const Population& pop, double d_max);

}  // namespace repsel
