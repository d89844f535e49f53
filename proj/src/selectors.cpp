#include "repsel/selectors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

#include "repsel/embedding.hpp"
#include "repsel/kmedoids.hpp"
#include "repsel/objective.hpp"
#include "repsel/rng.hpp"

namespace repsel {

namespace {

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::vector<std::uint32_t> draw_context(rng::Stream& stream, std::uint32_t n_demos, int k) {
  return stream.sample_without_replacement(n_demos, static_cast<std::uint32_t>(k));
}

SelectionResult finalize(const Population& pop, std::vector<AgentSpec> agents,
                         std::vector<double> trace, double wall_time) {
  SelectionResult result;
  result.agents = std::move(agents);
  result.objective_trace = std::move(trace);
  result.wall_time_sec = wall_time;
  if (result.agents.empty()) {
    result.final_gap = pop.d_max();
    return result;
  }
  result.assignment.resize(pop.n_humans());
  double sum = 0.0;
  for (std::size_t h = 0; h < pop.n_humans(); ++h) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_agent = 0;
    for (std::size_t a = 0; a < result.agents.size(); ++a) {
      const double d = distance(pop.human(h).train_embedding, result.agents[a].embedding);
      if (d < best) {
        best = d;
        best_agent = a;
      }
    }
    result.assignment[h] = best_agent;
    sum += best;
  }
  result.final_gap = sum / static_cast<double>(pop.n_humans());
  return result;
}

}  // namespace

void validate_config(const SelectorConfig& cfg, const Population& pop) {
  if (cfg.m < 0) throw std::invalid_argument("M must be >= 0");
  if (cfg.k < 1) throw std::invalid_argument("K must be >= 1");
  if (!(cfg.psi > 0.0 && cfg.psi <= 1.0)) throw std::invalid_argument("psi must lie in (0, 1]");
  const auto target = cfg.pool_target > 0 ? cfg.pool_target : static_cast<int>(pop.n_humans());
  if (std::llround(cfg.psi * target) < 1) {
    throw std::invalid_argument("psi * pool_target must be at least 1");
  }
  if (cfg.alpha < 0 || static_cast<std::size_t>(cfg.alpha) > pop.demos().size()) {
    throw std::invalid_argument("alpha must lie in [0, |D|]");
  }
  if (static_cast<std::size_t>(cfg.k) > pop.demos().size()) {
    throw std::invalid_argument("K exceeds the number of train demonstrations");
  }
}

std::uint64_t count_contexts(std::uint64_t n_demos, int k, std::uint64_t cap) {
  if (k < 0 || static_cast<std::uint64_t>(k) > n_demos) return 0;
  __uint128_t result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * (n_demos - static_cast<std::uint64_t>(k) + i) / i;
    if (result > cap) return cap;
  }
  return static_cast<std::uint64_t>(result);
}

SelectionResult select_single(const Population& pop, const BehaviorModel& model,
                              const SelectorConfig& cfg) {
  validate_config(cfg, pop);
  Timer timer;
  MinDistCache cache(pop.train_embeddings(), pop.d_max());
  std::vector<AgentSpec> agents;
  std::vector<double> trace;

  rng::Stream ctx_stream(rng::derive(cfg.seed, "context", 0));
  const auto context = draw_context(ctx_stream, static_cast<std::uint32_t>(pop.demos().size()),
                                    cfg.k);
  for (int i = 0; i < cfg.m; ++i) {
    AgentSpec spec;
    spec.context = context;
    spec.id = "agent-" + std::to_string(i);
    spec = materialize_agent(pop, std::move(spec), pop.train_tasks(), model,
                             rng::derive(cfg.seed, "rollout", static_cast<std::uint64_t>(i)));
    cache.commit(spec.embedding, spec.id);
    trace.push_back(cache.objective());
    agents.push_back(std::move(spec));
  }
  return finalize(pop, std::move(agents), std::move(trace), timer.seconds());
}

SelectionResult select_random(const Population& pop, const BehaviorModel& model,
                              const SelectorConfig& cfg) {
  validate_config(cfg, pop);
  Timer timer;
  MinDistCache cache(pop.train_embeddings(), pop.d_max());
  std::vector<AgentSpec> agents;
  std::vector<double> trace;

  for (int i = 0; i < cfg.m; ++i) {
    rng::Stream ctx_stream(rng::derive(cfg.seed, "context", static_cast<std::uint64_t>(i)));
    AgentSpec spec;
    spec.context = draw_context(ctx_stream, static_cast<std::uint32_t>(pop.demos().size()), cfg.k);
    spec.id = "agent-" + std::to_string(i);
    spec = materialize_agent(pop, std::move(spec), pop.train_tasks(), model,
                             rng::derive(cfg.seed, "rollout", static_cast<std::uint64_t>(i)));
    cache.commit(spec.embedding, spec.id);
    trace.push_back(cache.objective());
    agents.push_back(std::move(spec));
  }
  return finalize(pop, std::move(agents), std::move(trace), timer.seconds());
}

SelectionResult select_kmedoids(const Population& pop, const BehaviorModel& model,
                                const SelectorConfig& cfg) {
  validate_config(cfg, pop);
  if (static_cast<std::size_t>(cfg.m) > pop.n_humans()) {
    throw std::invalid_argument("k-medoids needs M <= number of humans");
  }
  Timer timer;

  const auto n = pop.n_humans();
  Eigen::MatrixXd dissimilarity(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    dissimilarity(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(pop.human(i).train_embedding, pop.human(j).train_embedding);
      dissimilarity(i, j) = d;
      dissimilarity(j, i) = d;
    }
  }

  MinDistCache cache(pop.train_embeddings(), pop.d_max());
  std::vector<AgentSpec> agents;
  std::vector<double> trace;
  if (cfg.m == 0) return finalize(pop, {}, {}, timer.seconds());

  const PamResult pam = pam_cluster(dissimilarity, static_cast<std::size_t>(cfg.m));
  for (std::size_t slot = 0; slot < pam.medoids.size(); ++slot) {
    std::vector<std::uint32_t> pool;
    for (std::size_t h = 0; h < n; ++h) {
      if (pam.assignment[h] != slot) continue;
      const auto demos = pop.demos_of(h);
      pool.insert(pool.end(), demos.begin(), demos.end());
    }
    if (pool.size() < static_cast<std::size_t>(cfg.k)) {
      throw std::invalid_argument("cluster " + std::to_string(slot) + " holds only " +
                                  std::to_string(pool.size()) + " demos, need K=" +
                                  std::to_string(cfg.k));
    }
    rng::Stream stream(rng::derive(cfg.seed, "cluster", slot));
    AgentSpec spec;
    for (std::uint32_t pick : stream.sample_without_replacement(
             static_cast<std::uint32_t>(pool.size()), static_cast<std::uint32_t>(cfg.k))) {
      spec.context.push_back(pool[pick]);
    }
    std::sort(spec.context.begin(), spec.context.end());
    spec.id = "agent-" + std::to_string(slot);
    const std::uint64_t mat_seed = materialize_seed(cfg.seed, spec.context);
    spec = materialize_agent(pop, std::move(spec), pop.train_tasks(), model, mat_seed);
    cache.commit(spec.embedding, spec.id);
    trace.push_back(cache.objective());
    agents.push_back(std::move(spec));
  }
  return finalize(pop, std::move(agents), std::move(trace), timer.seconds());
}

SelectionResult select_greedy_full(const Population& pop, std::vector<AgentSpec> candidates,
                                   const SelectorConfig& cfg) {
  Timer timer;
  MinDistCache cache(pop.train_embeddings(), pop.d_max());
  std::vector<AgentSpec> agents;
  std::vector<double> trace;
  std::vector<bool> taken(candidates.size(), false);

  const std::size_t rounds =
      cfg.m <= 0 ? 0 : std::min<std::size_t>(static_cast<std::size_t>(cfg.m), candidates.size());
  for (std::size_t round = 0; round < rounds; ++round) {
    double best_gain = -1.0;
    std::size_t best = candidates.size();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (taken[c]) continue;
      const double gain = cache.marginal_gain(candidates[c].embedding);
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    taken[best] = true;
    cache.commit(candidates[best].embedding, candidates[best].id);
    trace.push_back(cache.objective());
    agents.push_back(std::move(candidates[best]));
  }
  return finalize(pop, std::move(agents), std::move(trace), timer.seconds());
}

SelectionResult select_sample_greedy(const Population& pop, const BehaviorModel& model,
                                     const SelectorConfig& cfg) {
  validate_config(cfg, pop);
  Timer timer;

  const auto n_demos = static_cast<std::uint32_t>(pop.demos().size());
  const auto target = cfg.pool_target > 0 ? cfg.pool_target : static_cast<int>(pop.n_humans());
  const auto pool_size = static_cast<std::uint64_t>(
      std::max<long long>(1, std::llround(cfg.psi * target)));

  std::set<std::vector<std::uint32_t>> contexts;
  const std::uint64_t total = count_contexts(n_demos, cfg.k, pool_size + 1);
  if (total <= pool_size) {
    // The pool covers the whole context space: enumerate it.
    std::vector<std::uint32_t> ctx(cfg.k);
    for (int i = 0; i < cfg.k; ++i) ctx[i] = static_cast<std::uint32_t>(i);
    while (true) {
      contexts.insert(ctx);
      int slot = cfg.k - 1;
      while (slot >= 0 && ctx[slot] == n_demos - static_cast<std::uint32_t>(cfg.k - slot)) --slot;
      if (slot < 0) break;
      ++ctx[slot];
      for (int j = slot + 1; j < cfg.k; ++j) ctx[j] = ctx[j - 1] + 1;
    }
  } else {
    rng::Stream stream(rng::derive(cfg.seed, "pool"));
    while (contexts.size() < pool_size) {
      contexts.insert(draw_context(stream, n_demos, cfg.k));
    }
  }

  std::vector<AgentSpec> candidates;
  candidates.reserve(contexts.size());
  std::size_t index = 0;
  for (const auto& ctx : contexts) {
    AgentSpec spec;
    spec.context = ctx;
    spec.id = "cand-" + std::to_string(index++);
    const std::uint64_t mat_seed = materialize_seed(cfg.seed, spec.context);
    candidates.push_back(
        materialize_agent(pop, std::move(spec), pop.train_tasks(), model, mat_seed));
  }

  auto result = select_greedy_full(pop, std::move(candidates), cfg);
  result.wall_time_sec = timer.seconds();
  return result;
}

SelectionResult select_reppop_demo(const Population& pop, const BehaviorModel& model,
                                   const SelectorConfig& cfg) {
  validate_config(cfg, pop);
  Timer timer;
  MinDistCache cache(pop.train_embeddings(), pop.d_max());
  MaterializeCache probes(pop, model, cfg.seed);
  std::vector<AgentSpec> agents;
  std::vector<double> trace;

  const auto n_demos = static_cast<std::uint32_t>(pop.demos().size());
  for (int i = 0; i < cfg.m; ++i) {
    std::vector<std::uint32_t> context;
    for (int round = 0; round < cfg.k; ++round) {
      std::vector<std::uint32_t> pool;
      pool.reserve(n_demos - context.size());
      for (std::uint32_t d = 0; d < n_demos; ++d) {
        if (!std::binary_search(context.begin(), context.end(), d)) pool.push_back(d);
      }
      if (cfg.alpha > 0 && static_cast<std::size_t>(cfg.alpha) < pool.size()) {
        rng::Stream stream(rng::derive(cfg.seed, "alpha",
                                       static_cast<std::uint64_t>(i) * cfg.k + round));
        std::vector<std::uint32_t> sampled;
        sampled.reserve(cfg.alpha);
        for (std::uint32_t pick : stream.sample_without_replacement(
                 static_cast<std::uint32_t>(pool.size()), static_cast<std::uint32_t>(cfg.alpha))) {
          sampled.push_back(pool[pick]);
        }
        pool = std::move(sampled);  // already ascending
      }

      double best_gain = -1.0;
      std::uint32_t best_demo = 0;
      for (std::uint32_t d : pool) {
        std::vector<std::uint32_t> probe = context;
        probe.insert(std::lower_bound(probe.begin(), probe.end(), d), d);
        const double gain = cache.marginal_gain(probes.embedding(probe));
        if (gain > best_gain) {
          best_gain = gain;
          best_demo = d;
        }
      }
      context.insert(std::lower_bound(context.begin(), context.end(), best_demo), best_demo);
    }

    AgentSpec spec;
    spec.context = context;
    spec.id = "agent-" + std::to_string(i);
    spec.embedding = probes.embedding(context);
    cache.commit(spec.embedding, spec.id);
    trace.push_back(cache.objective());
    agents.push_back(std::move(spec));
  }
  return finalize(pop, std::move(agents), std::move(trace), timer.seconds());
}

std::vector<AgentSpec> build_proxy_pool(const Population& pop, const BehaviorModel& model,
                                        const SelectorConfig& cfg, ProxyStrategy strategy) {
  for (std::size_t h = 0; h < pop.n_humans(); ++h) {
    if (pop.demos_of(h).size() < static_cast<std::size_t>(cfg.k)) {
      throw std::invalid_argument("human '" + pop.human(h).id + "' has fewer than K=" +
                                  std::to_string(cfg.k) + " train demos");
    }
  }
  std::vector<AgentSpec> pool;
  pool.reserve(pop.n_humans());
  for (std::size_t h = 0; h < pop.n_humans(); ++h) {
    pool.push_back(proxy_for_human(pop, h, cfg.k, strategy, model, cfg.seed));
  }
  return pool;
}

SelectionResult select_reppop_mapped(const Population& pop, const BehaviorModel& model,
                                     const SelectorConfig& cfg, ProxyStrategy strategy) {
  validate_config(cfg, pop);
  Timer timer;
  auto result = select_greedy_full(pop, build_proxy_pool(pop, model, cfg, strategy), cfg);
  result.wall_time_sec = timer.seconds();
  return result;
}

}  // namespace repsel
