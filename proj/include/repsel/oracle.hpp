#pragma once

#include "repsel/selectors.hpp"

namespace repsel {

/// Exhaustive search over all size-M candidate subsets. Ties resolve to the
/// lexicographically smallest index tuple. Refuses instances whose subset
/// count exceeds the budget.
SelectionResult brute_force_optimum(const Population& pop,
                                    const std::vector<AgentSpec>& candidates, int m,
                                    std::uint64_t budget = 2'000'000);

struct SubmodularityReport {
  int trials = 0;
  int violations = 0;
  double worst_margin = 0.0;  // most negative observed slack
};

/// Samples random chains A subset-of B and l' outside B, counting violations
/// of the diminishing-returns inequality beyond 1e-9.
SubmodularityReport check_submodularity(const Population& pop,
                                        const std::vector<AgentSpec>& candidates, int trials,
                                        std::uint64_t seed);

enum class GammaPool { humans, single_owner_contexts };

struct BoundReport {
  double gamma = 1.0;
  double rho_emp = 0.0;
  double f_opt_full = 0.0;
  double f_opt_human = 0.0;
  double f_method = 0.0;
  double bound_value = 0.0;
  bool satisfied = false;
  bool vacuous = false;    // bound_value <= 0, trivially satisfied
  std::string pool;        // which full-pool surrogate produced f_opt_full
};

/// gamma and rho for a human-mapped proxy pool: gamma from the two
/// brute-force optima (humans vs the chosen full-pool surrogate), rho from
/// the worst human-to-proxy distance. f_method is left for the caller.
BoundReport compute_gamma_rho(const Population& pop, const std::vector<AgentSpec>& proxy_pool,
                              int m, GammaPool pool, const BehaviorModel* model,
                              std::uint64_t seed, std::uint64_t budget = 2'000'000);

/// Runs the mapped selector and checks its objective against
/// (1 - 1/e) * (gamma * f_opt_full - rho).
BoundReport verify_mapped_bound(const Population& pop, const BehaviorModel& model,
                            const SelectorConfig& cfg, ProxyStrategy strategy,
                            GammaPool pool = GammaPool::humans,
                            std::uint64_t budget = 2'000'000);

/// Humans exposed as zero-context pseudo-agents (train embeddings); the
/// candidate list for optimum-over-humans computations.
std::vector<AgentSpec> humans_as_agents(const Population& pop);

// ---- Randomized sweep harnesses (shared by `verify` and the acceptance
// suite). Instances are small seeded ordinal populations with scheme-safe
// d_max overrides.

struct SubmodularitySweep {
  int instances = 0;
  int trials = 0;
  int violations = 0;
  double worst_margin = 0.0;
};
SubmodularitySweep run_submodularity_sweep(int instances, int trials_per_instance,
                                           std::uint64_t seed);

struct GreedyBoundSweep {
  int instances = 0;
  int failures = 0;
  double min_ratio = 1.0;  // min over instances of f_greedy / f_opt (when f_opt > 0)
};
GreedyBoundSweep run_greedy_bound_sweep(int instances, std::uint64_t seed);

struct MappedBoundSweep {
  int instances = 0;
  int failures = 0;
  int vacuous = 0;
  int refusals = 0;  // enumeration-budget refusals (skipped, not fatal)
  std::vector<BoundReport> reports;
};
MappedBoundSweep run_mapped_bound_sweep(int instances, const std::vector<double>& rho_values,
                                 std::uint64_t seed);

}  // namespace repsel
