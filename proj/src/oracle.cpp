#include "repsel/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "repsel/embedding.hpp"
#include "repsel/objective.hpp"
#include "repsel/population.hpp"
#include "repsel/rng.hpp"

namespace repsel {

namespace {

// Human x candidate distances, the shared kernel of every enumeration here.
Eigen::MatrixXd distance_table(const Population& pop, const std::vector<AgentSpec>& candidates) {
  Eigen::MatrixXd table(pop.n_humans(), candidates.size());
  for (std::size_t h = 0; h < pop.n_humans(); ++h) {
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      table(h, c) = distance(pop.human(h).train_embedding, candidates[c].embedding);
    }
  }
  return table;
}

double subset_objective(const Eigen::MatrixXd& table, std::span<const std::size_t> subset,
                        double d_max) {
  if (subset.empty()) return 0.0;
  double sum = 0.0;
  for (Eigen::Index h = 0; h < table.rows(); ++h) {
    double best = table(h, static_cast<Eigen::Index>(subset[0]));
    for (std::size_t i = 1; i < subset.size(); ++i) {
      best = std::min(best, table(h, static_cast<Eigen::Index>(subset[i])));
    }
    sum += d_max - std::min(best, d_max);
  }
  return sum / static_cast<double>(table.rows());
}

}  // namespace

SelectionResult brute_force_optimum(const Population& pop,
                                    const std::vector<AgentSpec>& candidates, int m,
                                    std::uint64_t budget) {
  if (m < 0) throw std::invalid_argument("brute_force_optimum: M must be >= 0");
  const auto n = candidates.size();
  const auto m_eff = std::min<std::size_t>(static_cast<std::size_t>(m), n);
  const std::uint64_t n_subsets = count_contexts(n, static_cast<int>(m_eff), budget + 1);
  if (n_subsets > budget) {
    throw std::runtime_error("brute_force_optimum: C(" + std::to_string(n) + ", " +
                             std::to_string(m_eff) + ") exceeds the enumeration budget of " +
                             std::to_string(budget));
  }

  const Eigen::MatrixXd table = distance_table(pop, candidates);
  std::vector<std::size_t> subset(m_eff);
  for (std::size_t i = 0; i < m_eff; ++i) subset[i] = i;
  std::vector<std::size_t> best_subset = subset;
  double best_f = m_eff == 0 ? 0.0 : subset_objective(table, subset, pop.d_max());

  if (m_eff > 0) {
    while (true) {
      // next lexicographic combination
      std::size_t slot = m_eff;
      while (slot > 0 && subset[slot - 1] == n - (m_eff - (slot - 1))) --slot;
      if (slot == 0) break;
      --slot;
      ++subset[slot];
      for (std::size_t j = slot + 1; j < m_eff; ++j) subset[j] = subset[j - 1] + 1;

      const double f = subset_objective(table, subset, pop.d_max());
      if (f > best_f) {
        best_f = f;
        best_subset = subset;
      }
    }
  }

  // Package as a SelectionResult: commit in index order for the trace.
  MinDistCache cache(pop.train_embeddings(), pop.d_max());
  SelectionResult result;
  for (std::size_t c : best_subset) {
    result.agents.push_back(candidates[c]);
    cache.commit(candidates[c].embedding, candidates[c].id);
    result.objective_trace.push_back(cache.objective());
  }
  result.final_gap = result.agents.empty() ? pop.d_max() : cache.gap();
  if (!result.agents.empty()) {
    result.assignment.resize(pop.n_humans());
    for (std::size_t h = 0; h < pop.n_humans(); ++h) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_agent = 0;
      for (std::size_t a = 0; a < best_subset.size(); ++a) {
        const double d = table(h, static_cast<Eigen::Index>(best_subset[a]));
        if (d < best) {
          best = d;
          best_agent = a;
        }
      }
      result.assignment[h] = best_agent;
    }
  }
  return result;
}

SubmodularityReport check_submodularity(const Population& pop,
                                        const std::vector<AgentSpec>& candidates, int trials,
                                        std::uint64_t seed) {
  if (candidates.size() < 2) throw std::invalid_argument("need at least two candidates");
  const Eigen::MatrixXd table = distance_table(pop, candidates);
  const double d_max = pop.d_max();
  const auto n = static_cast<std::uint32_t>(candidates.size());

  SubmodularityReport report;
  report.trials = trials;
  rng::Stream stream(rng::derive(seed, "submodularity"));
  for (int trial = 0; trial < trials; ++trial) {
    // B of size 0..n-1, A a random subset of B, l' outside B.
    const auto b_size = static_cast<std::uint32_t>(stream.below(n));
    auto b = stream.sample_without_replacement(n, b_size);
    std::vector<std::size_t> set_b(b.begin(), b.end());
    std::vector<std::size_t> set_a;
    for (std::size_t x : set_b) {
      if (stream.bernoulli(0.5)) set_a.push_back(x);
    }
    std::vector<std::size_t> outside;
    for (std::uint32_t c = 0; c < n; ++c) {
      if (!std::binary_search(b.begin(), b.end(), c)) outside.push_back(c);
    }
    const std::size_t extra = outside[stream.below(outside.size())];

    auto a_ext = set_a;
    a_ext.push_back(extra);
    auto b_ext = set_b;
    b_ext.push_back(extra);

    const double gain_a =
        subset_objective(table, a_ext, d_max) - subset_objective(table, set_a, d_max);
    const double gain_b =
        subset_objective(table, b_ext, d_max) - subset_objective(table, set_b, d_max);
    const double margin = gain_a - gain_b;
    report.worst_margin = std::min(report.worst_margin, margin);
    if (margin < -1e-9) ++report.violations;
  }
  return report;
}

std::vector<AgentSpec> humans_as_agents(const Population& pop) {
  std::vector<AgentSpec> out;
  out.reserve(pop.n_humans());
  for (std::size_t h = 0; h < pop.n_humans(); ++h) {
    AgentSpec spec;
    spec.id = "human-" + pop.human(h).id;
    spec.embedding = pop.human(h).train_embedding;
    out.push_back(std::move(spec));
  }
  return out;
}

namespace {

// All single-owner K-demo contexts, materialized. The executable surrogate
// for the full agent space when enumerating it is infeasible.
std::vector<AgentSpec> single_owner_pool(const Population& pop, const BehaviorModel& model,
                                         int k, std::uint64_t seed, std::uint64_t budget) {
  std::uint64_t total = 0;
  for (std::size_t h = 0; h < pop.n_humans(); ++h) {
    if (pop.demos_of(h).size() < static_cast<std::size_t>(k)) {
      throw std::invalid_argument("human '" + pop.human(h).id + "' has fewer than K=" +
                                  std::to_string(k) + " train demos");
    }
    total += count_contexts(pop.demos_of(h).size(), k, budget + 1);
    if (total > budget) {
      throw std::runtime_error("single-owner context pool exceeds the enumeration budget");
    }
  }
  std::vector<AgentSpec> pool;
  pool.reserve(total);
  for (std::size_t h = 0; h < pop.n_humans(); ++h) {
    const auto demos = pop.demos_of(h);
    std::vector<std::uint32_t> pick(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) pick[i] = static_cast<std::uint32_t>(i);
    while (true) {
      AgentSpec spec;
      spec.context.reserve(k);
      for (std::uint32_t i : pick) spec.context.push_back(demos[i]);
      spec.id = "pool-" + pop.human(h).id + "-" + std::to_string(pool.size());
      const std::uint64_t mat_seed = materialize_seed(seed, spec.context);
      pool.push_back(materialize_agent(pop, std::move(spec), pop.train_tasks(), model, mat_seed));

      int slot = k - 1;
      while (slot >= 0 &&
             pick[slot] == demos.size() - static_cast<std::size_t>(k - slot)) {
        --slot;
      }
      if (slot < 0) break;
      ++pick[slot];
      for (int j = slot + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return pool;
}

}  // namespace

BoundReport compute_gamma_rho(const Population& pop, const std::vector<AgentSpec>& proxy_pool,
                              int m, GammaPool pool, const BehaviorModel* model,
                              std::uint64_t seed, std::uint64_t budget) {
  if (proxy_pool.size() != pop.n_humans()) {
    throw std::invalid_argument("proxy pool must map one agent per human");
  }
  BoundReport report;

  const auto humans = humans_as_agents(pop);
  const auto opt_human = brute_force_optimum(pop, humans, m, budget);
  report.f_opt_human =
      opt_human.objective_trace.empty() ? 0.0 : opt_human.objective_trace.back();

  switch (pool) {
    case GammaPool::humans:
      report.pool = "humans";
      report.f_opt_full = report.f_opt_human;
      break;
    case GammaPool::single_owner_contexts: {
      report.pool = "single-owner-contexts";
      if (model == nullptr) {
        throw std::invalid_argument("single-owner pool needs a behavior model");
      }
      const auto full = single_owner_pool(pop, *model, proxy_pool.empty()
                                                           ? 1
                                                           : static_cast<int>(
                                                                 proxy_pool[0].context.size()),
                                          seed, budget);
      const auto opt = brute_force_optimum(pop, full, m, budget);
      report.f_opt_full = opt.objective_trace.empty() ? 0.0 : opt.objective_trace.back();
      break;
    }
  }

  report.gamma = report.f_opt_full > 0.0 ? report.f_opt_human / report.f_opt_full : 1.0;
  for (std::size_t h = 0; h < pop.n_humans(); ++h) {
    report.rho_emp =
        std::max(report.rho_emp, distance(pop.human(h).train_embedding, proxy_pool[h].embedding));
  }
  return report;
}

BoundReport verify_mapped_bound(const Population& pop, const BehaviorModel& model,
                            const SelectorConfig& cfg, ProxyStrategy strategy, GammaPool pool,
                            std::uint64_t budget) {
  const auto proxies = build_proxy_pool(pop, model, cfg, strategy);
  BoundReport report = compute_gamma_rho(pop, proxies, cfg.m, pool, &model, cfg.seed, budget);

  const auto greedy = select_greedy_full(pop, proxies, cfg);
  report.f_method = greedy.objective_trace.empty() ? 0.0 : greedy.objective_trace.back();

  const double one_minus_inv_e = 1.0 - 1.0 / std::exp(1.0);
  report.bound_value = one_minus_inv_e * (report.gamma * report.f_opt_full - report.rho_emp);
  report.vacuous = report.bound_value <= 0.0;
  report.satisfied = report.f_method >= report.bound_value - 1e-9;
  return report;
}

namespace {

GeneratorSpec sweep_instance_spec(rng::Stream& stream) {
  GeneratorSpec spec;
  spec.scheme = Scheme::ordinal;
  spec.n_humans = 3 + static_cast<int>(stream.below(6));  // 3..8
  spec.n_tasks = 4 + static_cast<int>(stream.below(7));   // 4..10
  spec.n_clusters = 1 + static_cast<int>(stream.below(
                            std::min(3u, static_cast<unsigned>(spec.n_humans))));
  spec.cluster_spread = 0.1 + 0.3 * stream.uniform();
  spec.seed = stream.next_u64();
  // Scheme-safe bound: ordinal vectors live in [-1,1]^d, so no human-agent
  // distance can reach 2*sqrt(d) + 1 on either split.
  spec.d_max_override = 2.0 * std::sqrt(static_cast<double>(spec.n_tasks)) + 1.0;
  return spec;
}

std::vector<AgentSpec> box_candidates(const Population& pop, int count, rng::Stream& stream) {
  std::vector<AgentSpec> candidates;
  candidates.reserve(count);
  const auto dim = pop.human(0).train_embedding.dim();
  for (int c = 0; c < count; ++c) {
    AgentSpec spec;
    spec.id = "cand-" + std::to_string(c);
    spec.embedding.metric = pop.metric();
    spec.embedding.values.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) spec.embedding.values[i] = stream.uniform(-1.0, 1.0);
    candidates.push_back(std::move(spec));
  }
  return candidates;
}

}  // namespace

SubmodularitySweep run_submodularity_sweep(int instances, int trials_per_instance,
                                           std::uint64_t seed) {
  SubmodularitySweep sweep;
  rng::Stream stream(rng::derive(seed, "submodularity-sweep"));
  for (int i = 0; i < instances; ++i) {
    const Population pop = generate_population(sweep_instance_spec(stream));
    const int n_candidates = 4 + static_cast<int>(stream.below(9));  // 4..12
    const auto candidates = box_candidates(pop, n_candidates, stream);
    const auto report = check_submodularity(pop, candidates, trials_per_instance, stream.next_u64());
    sweep.instances += 1;
    sweep.trials += report.trials;
    sweep.violations += report.violations;
    sweep.worst_margin = std::min(sweep.worst_margin, report.worst_margin);
  }
  return sweep;
}

GreedyBoundSweep run_greedy_bound_sweep(int instances, std::uint64_t seed) {
  GreedyBoundSweep sweep;
  const double one_minus_inv_e = 1.0 - 1.0 / std::exp(1.0);
  rng::Stream stream(rng::derive(seed, "greedy-bound-sweep"));
  for (int i = 0; i < instances; ++i) {
    const Population pop = generate_population(sweep_instance_spec(stream));
    const int n_candidates = 4 + static_cast<int>(stream.below(9));  // 4..12
    const auto candidates = box_candidates(pop, n_candidates, stream);

    SelectorConfig cfg;
    cfg.m = 1 + static_cast<int>(stream.below(4));  // 1..4
    cfg.k = 1;
    cfg.seed = stream.next_u64();

    const auto greedy = select_greedy_full(pop, candidates, cfg);
    const auto opt = brute_force_optimum(pop, candidates, cfg.m);
    const double f_greedy = greedy.objective_trace.empty() ? 0.0 : greedy.objective_trace.back();
    const double f_opt = opt.objective_trace.empty() ? 0.0 : opt.objective_trace.back();

    sweep.instances += 1;
    if (f_greedy < one_minus_inv_e * f_opt - 1e-9) sweep.failures += 1;
    if (f_opt > 0.0) sweep.min_ratio = std::min(sweep.min_ratio, f_greedy / f_opt);
  }
  return sweep;
}

MappedBoundSweep run_mapped_bound_sweep(int instances, const std::vector<double>& rho_values,
                                 std::uint64_t seed) {
  MappedBoundSweep sweep;
  rng::Stream stream(rng::derive(seed, "mapped-bound-sweep"));
  for (int i = 0; i < instances; ++i) {
    const Population pop = generate_population(sweep_instance_spec(stream));
    const double rho = rho_values[i % rho_values.size()];
    const NoisyProxyModel model(rho);

    SelectorConfig cfg;
    cfg.m = 1 + static_cast<int>(stream.below(
                    std::min<std::uint64_t>(4, pop.n_humans())));
    cfg.k = 1 + static_cast<int>(stream.below(
                    std::min<std::uint64_t>(2, pop.train_tasks().size())));
    cfg.seed = stream.next_u64();

    const auto strategy = (i % 2 == 0) ? ProxyStrategy::uniform : ProxyStrategy::greedy;
    sweep.instances += 1;
    try {
      auto report = verify_mapped_bound(pop, model, cfg, strategy, GammaPool::humans);
      if (!report.satisfied) sweep.failures += 1;
      if (report.vacuous) sweep.vacuous += 1;
      sweep.reports.push_back(std::move(report));
    } catch (const std::runtime_error&) {
      sweep.refusals += 1;  // over-budget instance; skip, keep sweeping
    }
  }
  return sweep;
}

}  // namespace repsel
