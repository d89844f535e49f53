#pragma once

#include "repsel/behavior.hpp"
#include "repsel/types.hpp"

namespace repsel {

struct SelectorConfig {
  int m = 1;            // agents to select
  int k = 1;            // demonstrations per context
  double psi = 1.0;     // sample-greedy pool fraction
  int alpha = 0;        // demo candidates per round (0 = full scan)
  int pool_target = 0;  // sample-greedy pool reference size (0 = |H|)
  std::uint64_t seed = 0;
};

void validate_config(const SelectorConfig& cfg, const Population& pop);

struct SelectionResult {
  std::vector<AgentSpec> agents;
  std::vector<double> objective_trace;  // f after each addition; nondecreasing
  double final_gap = 0.0;
  std::vector<std::size_t> assignment;  // human -> index into agents
  double wall_time_sec = 0.0;
};

/// One uniformly random context, M rollouts (distinct rollout seeds).
SelectionResult select_single(const Population& pop, const BehaviorModel& model,
                              const SelectorConfig& cfg);

/// M independent uniformly random contexts, one rollout each.
SelectionResult select_random(const Population& pop, const BehaviorModel& model,
                              const SelectorConfig& cfg);

/// PAM-clusters the humans into M groups and builds one agent per group from
/// K demos sampled across the group's members.
SelectionResult select_kmedoids(const Population& pop, const BehaviorModel& model,
                                const SelectorConfig& cfg);

/// Standard greedy over an already-materialized candidate list; ties go to
/// the lowest candidate index. Selects min(M, |candidates|) agents.
SelectionResult select_greedy_full(const Population& pop, std::vector<AgentSpec> candidates,
                                   const SelectorConfig& cfg);

/// Greedy within a sampled context pool of size max(1, round(psi * target)),
/// target defaulting to the number of humans.
SelectionResult select_sample_greedy(const Population& pop, const BehaviorModel& model,
                                     const SelectorConfig& cfg);

/// Builds each agent's context one demonstration at a time, each round taking
/// the demo (from the full pool or an alpha-subsample) whose extended agent
/// has the largest marginal objective.
SelectionResult select_reppop_demo(const Population& pop, const BehaviorModel& model,
                                   const SelectorConfig& cfg);

/// One proxy agent per human (uniform or greedy demo choice), then greedy
/// selection of M proxies.
SelectionResult select_reppop_mapped(const Population& pop, const BehaviorModel& model,
                                     const SelectorConfig& cfg, ProxyStrategy strategy);

/// The full human-mapped proxy pool, indexed by human.
std::vector<AgentSpec> build_proxy_pool(const Population& pop, const BehaviorModel& model,
                                        const SelectorConfig& cfg, ProxyStrategy strategy);

/// Number of distinct K-demo contexts, saturating at `cap`.
std::uint64_t count_contexts(std::uint64_t n_demos, int k, std::uint64_t cap);

}  // namespace repsel
