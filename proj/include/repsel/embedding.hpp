#pragma once

#include <map>

#include "repsel/types.hpp"

namespace repsel {

/// Distance between two raw vectors under a metric. Expression-friendly:
/// accepts any Eigen dense expressions of matching size.
template <typename DerivedA, typename DerivedB>
double metric_distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                       Metric metric) {
  if (metric == Metric::l1) return (a.derived() - b.derived()).template lpNorm<1>();
  return (a.derived() - b.derived()).norm();
}

/// dist(e_1, e_2) with contract checks: dimensions and metrics must match.
double distance(const EmbeddingVector& a, const EmbeddingVector& b);

/// Builds an embedding from one response per task, in task_order position.
/// Binary -> 0/1 vector under L1; ordinal -> values under L2; continuous ->
/// aggregated per-task vectors under L2.
EmbeddingVector embed_from_responses(std::span<const ResponsePayload> responses_by_task,
                                     Scheme scheme,
                                     ContinuousAggregator aggregator = ContinuousAggregator::mean);

/// Map-keyed variant; every task in task_order must be present.
EmbeddingVector embed_from_responses(const std::map<std::string, ResponsePayload>& responses,
                                     std::span<const std::string> task_order, Scheme scheme,
                                     ContinuousAggregator aggregator = ContinuousAggregator::mean);

/// Representation-gap normalization: by d for binary (L1), by sqrt(d)
/// otherwise.
double normalize_error(double gap, Scheme scheme, Eigen::Index dim);

/// Throws if the embedding violates the scheme's range invariants.
void validate_embedding(const EmbeddingVector& e, Scheme scheme);

}  // namespace repsel
