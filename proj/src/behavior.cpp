#include "repsel/behavior.hpp"

#include <algorithm>
#include <cmath>

#include "repsel/embedding.hpp"
#include "repsel/rng.hpp"

namespace repsel {

std::uint64_t context_hash(std::span<const std::uint32_t> context) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint32_t d : context) {
    h ^= d;
    h *= 0x100000001b3ULL;
    h = rng::mix(h);
  }
  return h;
}

std::vector<ResponsePayload> BehaviorModel::respond_all(const Population& pop,
                                                        std::span<const std::uint32_t> context,
                                                        std::span<const std::size_t> tasks,
                                                        std::uint64_t seed) const {
  std::vector<ResponsePayload> out;
  out.reserve(tasks.size());
  for (std::size_t t : tasks) {
    try {
      out.push_back(respond(pop, context, t, seed));
    } catch (const std::invalid_argument&) {
      throw;  // context-resolution errors are not task-specific
    } catch (const std::exception& e) {
      throw std::runtime_error("task '" + pop.task_id(t) + "': " + e.what());
    }
  }
  return out;
}

namespace {

void check_context(const Population& pop, std::span<const std::uint32_t> context) {
  if (context.empty()) throw std::invalid_argument("context must contain at least one demo");
  for (std::uint32_t d : context) {
    if (d >= pop.demos().size()) {
      throw std::invalid_argument("context demo index " + std::to_string(d) +
                                  " does not resolve in this population");
    }
  }
}

// (owner index, weight) pairs, ascending owner, weights summing to 1.
std::vector<std::pair<std::uint32_t, double>> owner_weights(
    const Population& pop, std::span<const std::uint32_t> context) {
  std::vector<std::pair<std::uint32_t, double>> counts;
  for (std::uint32_t d : context) {
    const std::uint32_t owner = pop.demo(d).human;
    auto it = std::find_if(counts.begin(), counts.end(),
                           [owner](const auto& p) { return p.first == owner; });
    if (it == counts.end()) {
      counts.emplace_back(owner, 1.0);
    } else {
      it->second += 1.0;
    }
  }
  std::sort(counts.begin(), counts.end());
  for (auto& p : counts) p.second /= static_cast<double>(context.size());
  return counts;
}

// Per-task width of the noise vector: 1 for scalar schemes, the per-task
// vector dimension for the continuous scheme.
Eigen::Index per_task_width(const Population& pop) {
  if (pop.scheme() != Scheme::continuous) return 1;
  return std::get<ContinuousAnswer>(pop.human(0).responses[0]).value.size();
}

// Noise drawn once per (context, seed) over all population tasks. The L2 ball
// draw is joint, so restricting to any task subset keeps the norm <= rho_max.
struct NoiseTable {
  std::vector<char> flip;   // binary: per task
  Eigen::VectorXd shift;    // L2 schemes: tasks x width, task-major
};

NoiseTable draw_noise(const Population& pop, std::span<const std::uint32_t> context,
                      double rho_max, std::uint64_t seed) {
  NoiseTable table;
  const auto n_tasks = pop.n_tasks();
  rng::Stream stream(rng::derive(seed, "proxy-noise", context_hash(context)));
  if (pop.scheme() == Scheme::binary) {
    table.flip.assign(n_tasks, 0);
    const auto budget = static_cast<std::uint32_t>(std::floor(rho_max));
    if (budget > 0) {
      const auto count = static_cast<std::uint32_t>(stream.below(budget + 1));
      const auto cap = std::min<std::uint32_t>(count, static_cast<std::uint32_t>(n_tasks));
      for (std::uint32_t t : stream.sample_without_replacement(
               static_cast<std::uint32_t>(n_tasks), cap)) {
        table.flip[t] = 1;
      }
    }
  } else {
    const Eigen::Index dim = static_cast<Eigen::Index>(n_tasks) * per_task_width(pop);
    table.shift = Eigen::VectorXd::Zero(dim);
    if (rho_max > 0.0) {
      for (Eigen::Index i = 0; i < dim; ++i) table.shift[i] = stream.normal();
      const double norm = table.shift.norm();
      if (norm > 0.0) {
        const double radius =
            rho_max * std::pow(stream.uniform(), 1.0 / static_cast<double>(dim));
        table.shift *= radius / norm;
      }
    }
  }
  return table;
}

ResponsePayload proxy_response(const Population& pop,
                               const std::vector<std::pair<std::uint32_t, double>>& owners,
                               const NoiseTable& noise, std::size_t task) {
  switch (pop.scheme()) {
    case Scheme::binary: {
      double mix = 0.0;
      for (const auto& [owner, w] : owners) {
        mix += w * std::get<BinaryAnswer>(pop.human(owner).responses[task]).value;
      }
      int v = mix >= 0.5 ? 1 : 0;
      if (noise.flip[task]) v = 1 - v;
      return BinaryAnswer{v};
    }
    case Scheme::ordinal: {
      double mix = 0.0;
      for (const auto& [owner, w] : owners) {
        mix += w * std::get<OrdinalAnswer>(pop.human(owner).responses[task]).value;
      }
      return OrdinalAnswer{std::clamp(mix + noise.shift[static_cast<Eigen::Index>(task)], -1.0, 1.0)};
    }
    case Scheme::continuous: {
      const Eigen::Index width = per_task_width(pop);
      Eigen::VectorXd mix = Eigen::VectorXd::Zero(width);
      for (const auto& [owner, w] : owners) {
        mix += w * std::get<ContinuousAnswer>(pop.human(owner).responses[task]).value;
      }
      mix += noise.shift.segment(static_cast<Eigen::Index>(task) * width, width);
      return ContinuousAnswer{std::move(mix)};
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

NoisyProxyModel::NoisyProxyModel(double rho_max) : rho_max_(rho_max) {
  if (rho_max < 0.0) throw std::invalid_argument("rho_max must be >= 0");
}

ResponsePayload NoisyProxyModel::respond(const Population& pop,
                                         std::span<const std::uint32_t> context, std::size_t task,
                                         std::uint64_t seed) const {
  check_context(pop, context);
  const auto owners = owner_weights(pop, context);
  const auto noise = draw_noise(pop, context, rho_max_, seed);
  return proxy_response(pop, owners, noise, task);
}

std::vector<ResponsePayload> NoisyProxyModel::respond_all(const Population& pop,
                                                          std::span<const std::uint32_t> context,
                                                          std::span<const std::size_t> tasks,
                                                          std::uint64_t seed) const {
  check_context(pop, context);
  const auto owners = owner_weights(pop, context);
  const auto noise = draw_noise(pop, context, rho_max_, seed);
  std::vector<ResponsePayload> out;
  out.reserve(tasks.size());
  for (std::size_t t : tasks) out.push_back(proxy_response(pop, owners, noise, t));
  return out;
}

ResponsePayload ImitationModel::respond(const Population& pop,
                                        std::span<const std::uint32_t> context, std::size_t task,
                                        std::uint64_t /*seed*/) const {
  check_context(pop, context);
  const auto owners = owner_weights(pop, context);
  rng::Stream stream(rng::derive(context_hash(context), pop.task_id(task)));
  const double u = stream.uniform();
  double acc = 0.0;
  std::uint32_t chosen = owners.back().first;
  for (const auto& [owner, w] : owners) {
    acc += w;
    if (u < acc) {
      chosen = owner;
      break;
    }
  }
  return pop.human(chosen).responses[task];
}

AgentSpec materialize_agent(const Population& pop, AgentSpec spec,
                            std::span<const std::size_t> tasks, const BehaviorModel& model,
                            std::uint64_t seed) {
  check_context(pop, spec.context);
  if (tasks.empty()) throw std::invalid_argument("materialize_agent: no tasks");
  std::vector<ResponsePayload> responses;
  try {
    responses = model.respond_all(pop, spec.context, tasks, seed);
  } catch (const std::exception& e) {
    throw std::runtime_error("agent '" + spec.id + "': " + e.what());
  }
  for (std::size_t i = 0; i < responses.size(); ++i) {
    try {
      validate_payload(responses[i], pop.scheme());
    } catch (const std::exception& e) {
      throw std::runtime_error("agent '" + spec.id + "', task '" + pop.task_id(tasks[i]) +
                               "': " + e.what());
    }
  }
  spec.embedding = embed_from_responses(responses, pop.scheme(), pop.aggregator());
  return spec;
}

std::uint64_t materialize_seed(std::uint64_t run_seed, std::span<const std::uint32_t> context) {
  return rng::derive(run_seed, "materialize", context_hash(context));
}

MaterializeCache::MaterializeCache(const Population& pop, const BehaviorModel& model,
                                   std::uint64_t run_seed)
    : pop_(pop), model_(model), run_seed_(run_seed) {}

const EmbeddingVector& MaterializeCache::embedding(const std::vector<std::uint32_t>& context) {
  auto it = memo_.find(context);
  if (it != memo_.end()) return it->second;
  ++probes_;
  AgentSpec probe;
  probe.context = context;
  probe.id = "probe";
  probe = materialize_agent(pop_, std::move(probe), pop_.train_tasks(), model_,
                            materialize_seed(run_seed_, context));
  return memo_.emplace(context, std::move(probe.embedding)).first->second;
}

AgentSpec proxy_for_human(const Population& pop, std::size_t human, int k, ProxyStrategy strategy,
                          const BehaviorModel& model, std::uint64_t seed) {
  const auto pool = pop.demos_of(human);
  if (k < 1) throw std::invalid_argument("context size K must be >= 1");
  if (static_cast<std::size_t>(k) > pool.size()) {
    throw std::invalid_argument("human '" + pop.human(human).id + "' has only " +
                                std::to_string(pool.size()) + " train demos, need K=" +
                                std::to_string(k));
  }

  AgentSpec spec;
  spec.id = "proxy-" + pop.human(human).id;

  if (strategy == ProxyStrategy::uniform) {
    rng::Stream stream(rng::derive(seed, "proxy-uniform", human));
    for (std::uint32_t pick : stream.sample_without_replacement(
             static_cast<std::uint32_t>(pool.size()), static_cast<std::uint32_t>(k))) {
      spec.context.push_back(pool[pick]);
    }
    std::sort(spec.context.begin(), spec.context.end());
    const std::uint64_t mat_seed = materialize_seed(seed, spec.context);
    return materialize_agent(pop, std::move(spec), pop.train_tasks(), model, mat_seed);
  }

  // Greedy: extend the context one demo at a time, keeping the proxy
  // embedding as close to the human as possible.
  MaterializeCache cache(pop, model, seed);
  const auto& target = pop.human(human).train_embedding;
  std::vector<std::uint32_t> chosen;
  for (int round = 0; round < k; ++round) {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_demo = 0;
    bool found = false;
    for (std::uint32_t d : pool) {
      if (std::find(chosen.begin(), chosen.end(), d) != chosen.end()) continue;
      std::vector<std::uint32_t> probe = chosen;
      probe.insert(std::lower_bound(probe.begin(), probe.end(), d), d);
      const double dist_to_human = distance(target, cache.embedding(probe));
      if (dist_to_human < best) {
        best = dist_to_human;
        best_demo = d;
        found = true;
      }
    }
    if (!found) break;
    chosen.insert(std::lower_bound(chosen.begin(), chosen.end(), best_demo), best_demo);
  }
  spec.context = std::move(chosen);
  EmbeddingVector emb = cache.embedding(spec.context);
  spec.embedding = std::move(emb);
  return spec;
}

}  // namespace repsel
