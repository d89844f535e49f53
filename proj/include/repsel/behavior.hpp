#pragma once

#include <map>
#include <memory>

#include "repsel/types.hpp"

namespace repsel {

/// Stable identity of an unordered demonstration context (indices sorted).
std::uint64_t context_hash(std::span<const std::uint32_t> context);

/// Produces one task response for an agent conditioned on a demonstration
/// context. Deterministic models ignore the seed: identical (context, task)
/// always yield the identical payload.
class BehaviorModel {
 public:
  virtual ~BehaviorModel() = default;

  virtual std::string name() const = 0;
  virtual bool deterministic() const = 0;

  virtual ResponsePayload respond(const Population& pop, std::span<const std::uint32_t> context,
                                  std::size_t task, std::uint64_t seed) const = 0;

  /// Batch form; the default maps respond() over tasks. Models whose noise is
  /// coupled across tasks override this to draw it once.
  virtual std::vector<ResponsePayload> respond_all(const Population& pop,
                                                   std::span<const std::uint32_t> context,
                                                   std::span<const std::size_t> tasks,
                                                   std::uint64_t seed) const;
};

/// Embedding-space proxy: the agent behaves like the demo-count-weighted
/// mixture of the context's owners, perturbed by at most rho_max in the
/// population metric. A single-owner context therefore lands inside the
/// owner's rho_max-neighborhood, which is exactly what the mapped selectors'
/// guarantee needs.
///
/// Binary scheme: mixture rounds per coordinate and the perturbation flips a
/// seeded set of at most floor(rho_max) coordinates. L2 schemes: mixture plus
/// a noise vector drawn uniformly from the rho_max ball (jointly across all
/// tasks, so any task-subset restriction stays inside the ball), clamped to
/// the ordinal range where needed.
class NoisyProxyModel : public BehaviorModel {
 public:
  explicit NoisyProxyModel(double rho_max);

  std::string name() const override { return "proxy"; }
  bool deterministic() const override { return rho_max_ == 0.0; }
  double rho_max() const { return rho_max_; }

  ResponsePayload respond(const Population& pop, std::span<const std::uint32_t> context,
                          std::size_t task, std::uint64_t seed) const override;
  std::vector<ResponsePayload> respond_all(const Population& pop,
                                           std::span<const std::uint32_t> context,
                                           std::span<const std::size_t> tasks,
                                           std::uint64_t seed) const override;

 private:
  double rho_max_;
};

/// Answers each task with the response of one context owner, drawn with
/// probability proportional to the owner's demo count. The draw is seeded by
/// (context hash, task id) alone, so the model is deterministic.
class ImitationModel : public BehaviorModel {
 public:
  std::string name() const override { return "imitate"; }
  bool deterministic() const override { return true; }

  ResponsePayload respond(const Population& pop, std::span<const std::uint32_t> context,
                          std::size_t task, std::uint64_t seed) const override;
};

/// Fills the spec's embedding by asking the model for one response per task.
AgentSpec materialize_agent(const Population& pop, AgentSpec spec,
                            std::span<const std::size_t> tasks, const BehaviorModel& model,
                            std::uint64_t seed);

/// Canonical materialization seed: derived from the run seed and the context
/// alone, so identical contexts are memoizable within a run.
std::uint64_t materialize_seed(std::uint64_t run_seed, std::span<const std::uint32_t> context);

/// Memoized train-phase materialization shared by greedy probe loops.
class MaterializeCache {
 public:
  MaterializeCache(const Population& pop, const BehaviorModel& model, std::uint64_t run_seed);
  const EmbeddingVector& embedding(const std::vector<std::uint32_t>& context);
  std::size_t probes() const { return probes_; }

 private:
  const Population& pop_;
  const BehaviorModel& model_;
  std::uint64_t run_seed_;
  std::map<std::vector<std::uint32_t>, EmbeddingVector> memo_;
  std::size_t probes_ = 0;
};

enum class ProxyStrategy { uniform, greedy };

/// Builds human h's proxy agent from K of h's own train demos: sampled
/// uniformly, or chosen greedily to minimize dist(e_h, e_proxy).
AgentSpec proxy_for_human(const Population& pop, std::size_t human, int k, ProxyStrategy strategy,
                          const BehaviorModel& model, std::uint64_t seed);

}  // namespace repsel
