#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace repsel {

enum class Scheme { binary, ordinal, continuous };
enum class Metric { l1, l2 };
enum class ContinuousAggregator { mean, concat };

std::string to_string(Scheme s);
std::string to_string(Metric m);
Scheme scheme_from_string(const std::string& s);

/// A behavioral embedding: a dense real vector plus the metric it is
/// compared under. Binary-performance vectors use L1, everything else L2.
struct EmbeddingVector {
  Eigen::VectorXd values;
  Metric metric = Metric::l2;

  Eigen::Index dim() const { return values.size(); }
};

struct BinaryAnswer {
  int value = 0;  // 0 or 1
};
struct OrdinalAnswer {
  double value = 0.0;  // in [-1, 1]
};
struct ContinuousAnswer {
  Eigen::VectorXd value;
};

using ResponsePayload = std::variant<BinaryAnswer, OrdinalAnswer, ContinuousAnswer>;

Scheme payload_scheme(const ResponsePayload& payload);

/// Throws std::invalid_argument if the payload kind or value range does not
/// match the scheme (binary entries 0/1, ordinal in [-1,1], finite values).
void validate_payload(const ResponsePayload& payload, Scheme scheme);

/// One (task, response) pair owned by one human. Stored index-based; the
/// payload lives in the owner's complete response row.
struct Demonstration {
  std::uint32_t index = 0;  // position in the population's demo pool
  std::uint32_t human = 0;  // owner index
  std::uint32_t task = 0;   // task index
};

struct Human {
  std::string id;
  std::vector<ResponsePayload> responses;  // by task index, complete
  EmbeddingVector train_embedding;
  EmbeddingVector test_embedding;
};

/// An unordered context of exactly K demonstration references plus the
/// embedding the behavior model produced for it (empty until materialized).
struct AgentSpec {
  std::vector<std::uint32_t> context;  // sorted demo indices
  EmbeddingVector embedding;
  std::string id;
};

/// A complete human-response matrix with a train/test task split and
/// per-phase embeddings. Immutable after build(); safe to share across
/// threads.
class Population {
 public:
  static Population build(Scheme scheme, std::vector<std::string> tasks,
                          std::vector<std::string> human_ids,
                          std::vector<std::vector<ResponsePayload>> responses,
                          std::vector<std::size_t> train_tasks, std::vector<std::size_t> test_tasks,
                          ContinuousAggregator aggregator = ContinuousAggregator::mean,
                          std::optional<double> d_max_override = std::nullopt,
                          std::vector<int> cluster_labels = {});

  Scheme scheme() const { return scheme_; }
  ContinuousAggregator aggregator() const { return aggregator_; }
  Metric metric() const { return scheme_ == Scheme::binary ? Metric::l1 : Metric::l2; }

  std::size_t n_humans() const { return humans_.size(); }
  std::size_t n_tasks() const { return tasks_.size(); }
  const std::vector<std::string>& tasks() const { return tasks_; }
  const std::string& task_id(std::size_t t) const { return tasks_[t]; }

  const std::vector<Human>& humans() const { return humans_; }
  const Human& human(std::size_t h) const { return humans_[h]; }

  const std::vector<std::size_t>& train_tasks() const { return train_tasks_; }
  const std::vector<std::size_t>& test_tasks() const { return test_tasks_; }

  double d_max() const { return d_max_; }
  bool d_max_overridden() const { return d_max_overridden_; }

  /// The selectable demonstration pool: one demo per (human, train task),
  /// human-major order.
  const std::vector<Demonstration>& demos() const { return demos_; }
  const Demonstration& demo(std::uint32_t d) const { return demos_[d]; }
  std::string demo_id(std::uint32_t d) const;
  const ResponsePayload& demo_response(std::uint32_t d) const;
  /// Demo indices owned by human h (train tasks only).
  std::span<const std::uint32_t> demos_of(std::size_t h) const;

  const std::vector<int>& cluster_labels() const { return cluster_labels_; }  // analysis only

  std::vector<EmbeddingVector> train_embeddings() const;
  std::vector<EmbeddingVector> test_embeddings() const;

 private:
  Scheme scheme_ = Scheme::binary;
  ContinuousAggregator aggregator_ = ContinuousAggregator::mean;
  std::vector<std::string> tasks_;
  std::vector<std::size_t> train_tasks_;
  std::vector<std::size_t> test_tasks_;
  std::vector<Human> humans_;
  std::vector<Demonstration> demos_;
  std::vector<std::uint32_t> demo_index_;  // human-major, |H| x |train|
  std::vector<int> cluster_labels_;
  double d_max_ = 1.0;
  bool d_max_overridden_ = false;
};

}  // namespace repsel
