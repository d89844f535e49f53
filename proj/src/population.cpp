#include "repsel/population.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "repsel/embedding.hpp"
#include "repsel/rng.hpp"

namespace repsel {

namespace {

EmbeddingVector embed_phase(const std::vector<ResponsePayload>& responses,
                            const std::vector<std::size_t>& phase_tasks, Scheme scheme,
                            ContinuousAggregator aggregator) {
  std::vector<ResponsePayload> ordered;
  ordered.reserve(phase_tasks.size());
  for (std::size_t t : phase_tasks) ordered.push_back(responses[t]);
  return embed_from_responses(ordered, scheme, aggregator);
}

double max_pairwise(const std::vector<Human>& humans, bool train) {
  double best = 0.0;
  for (std::size_t i = 0; i < humans.size(); ++i) {
    for (std::size_t j = i + 1; j < humans.size(); ++j) {
      const auto& a = train ? humans[i].train_embedding : humans[i].test_embedding;
      const auto& b = train ? humans[j].train_embedding : humans[j].test_embedding;
      if (a.dim() == 0) continue;
      best = std::max(best, distance(a, b));
    }
  }
  return best;
}

}  // namespace

Population Population::build(Scheme scheme, std::vector<std::string> tasks,
                             std::vector<std::string> human_ids,
                             std::vector<std::vector<ResponsePayload>> responses,
                             std::vector<std::size_t> train_tasks,
                             std::vector<std::size_t> test_tasks,
                             ContinuousAggregator aggregator,
                             std::optional<double> d_max_override,
                             std::vector<int> cluster_labels) {
  if (human_ids.empty()) throw std::invalid_argument("population must have at least one human");
  if (tasks.empty()) throw std::invalid_argument("population must have at least one task");
  if (responses.size() != human_ids.size()) {
    throw std::invalid_argument("one response row per human required");
  }

  {
    std::unordered_set<std::string> seen;
    for (const auto& id : human_ids) {
      if (!seen.insert(id).second) throw std::invalid_argument("duplicate human id '" + id + "'");
    }
    seen.clear();
    for (const auto& t : tasks) {
      if (!seen.insert(t).second) throw std::invalid_argument("duplicate task id '" + t + "'");
    }
  }

  // train/test must partition the task indices.
  {
    std::set<std::size_t> all;
    for (std::size_t t : train_tasks) all.insert(t);
    for (std::size_t t : test_tasks) {
      if (!all.insert(t).second) {
        throw std::invalid_argument("train/test task sets overlap");
      }
    }
    if (all.size() != tasks.size() || (!all.empty() && *all.rbegin() >= tasks.size())) {
      throw std::invalid_argument("train/test split must cover every task exactly once");
    }
  }

  Population pop;
  pop.scheme_ = scheme;
  pop.aggregator_ = aggregator;
  pop.tasks_ = std::move(tasks);
  pop.train_tasks_ = std::move(train_tasks);
  pop.test_tasks_ = std::move(test_tasks);

  pop.humans_.reserve(human_ids.size());
  for (std::size_t h = 0; h < human_ids.size(); ++h) {
    auto& row = responses[h];
    if (row.size() != pop.tasks_.size()) {
      throw std::invalid_argument("human '" + human_ids[h] + "' must answer every task (got " +
                                  std::to_string(row.size()) + " of " +
                                  std::to_string(pop.tasks_.size()) + ")");
    }
    for (std::size_t t = 0; t < row.size(); ++t) {
      try {
        validate_payload(row[t], scheme);
      } catch (const std::exception& e) {
        throw std::invalid_argument("human '" + human_ids[h] + "', task '" + pop.tasks_[t] +
                                    "': " + e.what());
      }
    }
    Human human;
    human.id = std::move(human_ids[h]);
    human.responses = std::move(row);
    human.train_embedding = embed_phase(human.responses, pop.train_tasks_, scheme, aggregator);
    human.test_embedding = embed_phase(human.responses, pop.test_tasks_, scheme, aggregator);
    pop.humans_.push_back(std::move(human));
  }

  // Demo pool: one demonstration per (human, train task), human-major.
  pop.demos_.reserve(pop.humans_.size() * pop.train_tasks_.size());
  pop.demo_index_.reserve(pop.demos_.capacity());
  for (std::uint32_t h = 0; h < pop.humans_.size(); ++h) {
    for (std::size_t t : pop.train_tasks_) {
      Demonstration d;
      d.index = static_cast<std::uint32_t>(pop.demos_.size());
      d.human = h;
      d.task = static_cast<std::uint32_t>(t);
      pop.demo_index_.push_back(d.index);
      pop.demos_.push_back(d);
    }
  }

  if (d_max_override) {
    if (*d_max_override <= 0.0) throw std::invalid_argument("d_max must be positive");
    pop.d_max_ = *d_max_override;
    pop.d_max_overridden_ = true;
  } else {
    const double widest = std::max(max_pairwise(pop.humans_, true), max_pairwise(pop.humans_, false));
    pop.d_max_ = std::max(1.0, std::ceil(widest * 1.5));
  }

  if (!cluster_labels.empty() && cluster_labels.size() != pop.humans_.size()) {
    throw std::invalid_argument("cluster label count must match human count");
  }
  pop.cluster_labels_ = std::move(cluster_labels);
  return pop;
}

std::string Population::demo_id(std::uint32_t d) const {
  const auto& demo = demos_[d];
  return humans_[demo.human].id + "@" + tasks_[demo.task];
}

const ResponsePayload& Population::demo_response(std::uint32_t d) const {
  const auto& demo = demos_[d];
  return humans_[demo.human].responses[demo.task];
}

std::span<const std::uint32_t> Population::demos_of(std::size_t h) const {
  const std::size_t per_human = train_tasks_.size();
  return {demo_index_.data() + h * per_human, per_human};
}

std::vector<EmbeddingVector> Population::train_embeddings() const {
  std::vector<EmbeddingVector> out;
  out.reserve(humans_.size());
  for (const auto& h : humans_) out.push_back(h.train_embedding);
  return out;
}

std::vector<EmbeddingVector> Population::test_embeddings() const {
  std::vector<EmbeddingVector> out;
  out.reserve(humans_.size());
  for (const auto& h : humans_) out.push_back(h.test_embedding);
  return out;
}

namespace {

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> draw_split(std::size_t n_tasks,
                                                                         double train_fraction,
                                                                         std::uint64_t seed) {
  if (n_tasks < 2) throw std::invalid_argument("need at least two tasks to split");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(n_tasks)));
  n_train = std::clamp<std::size_t>(n_train, 1, n_tasks - 1);

  rng::Stream stream(rng::derive(seed, "task-split"));
  auto train = stream.sample_without_replacement(static_cast<std::uint32_t>(n_tasks),
                                                 static_cast<std::uint32_t>(n_train));
  std::vector<std::size_t> train_tasks(train.begin(), train.end());
  std::vector<std::size_t> test_tasks;
  test_tasks.reserve(n_tasks - n_train);
  std::size_t next = 0;
  for (std::size_t t = 0; t < n_tasks; ++t) {
    if (next < train_tasks.size() && train_tasks[next] == t) {
      ++next;
    } else {
      test_tasks.push_back(t);
    }
  }
  return {std::move(train_tasks), std::move(test_tasks)};
}

}  // namespace

Population split_tasks(const Population& pop, double train_fraction, std::uint64_t seed) {
  auto [train_tasks, test_tasks] = draw_split(pop.n_tasks(), train_fraction, seed);

  std::vector<std::string> human_ids;
  std::vector<std::vector<ResponsePayload>> responses;
  human_ids.reserve(pop.n_humans());
  responses.reserve(pop.n_humans());
  for (const auto& h : pop.humans()) {
    human_ids.push_back(h.id);
    responses.push_back(h.responses);
  }
  return Population::build(pop.scheme(), pop.tasks(), std::move(human_ids), std::move(responses),
                           std::move(train_tasks), std::move(test_tasks), pop.aggregator(),
                           pop.d_max_overridden() ? std::optional<double>(pop.d_max())
                                                  : std::nullopt,
                           pop.cluster_labels());
}

Population override_d_max(const Population& pop, double d_max) {
  std::vector<std::string> human_ids;
  std::vector<std::vector<ResponsePayload>> responses;
  human_ids.reserve(pop.n_humans());
  responses.reserve(pop.n_humans());
  for (const auto& h : pop.humans()) {
    human_ids.push_back(h.id);
    responses.push_back(h.responses);
  }
  return Population::build(pop.scheme(), pop.tasks(), std::move(human_ids), std::move(responses),
                           pop.train_tasks(), pop.test_tasks(), pop.aggregator(), d_max,
                           pop.cluster_labels());
}

namespace {

void check_generator_spec(const GeneratorSpec& spec) {
  if (spec.n_humans < 1) throw std::invalid_argument("n_humans must be >= 1");
  if (spec.n_tasks < 2) throw std::invalid_argument("n_tasks must be >= 2");
  if (spec.n_clusters < 1 || spec.n_clusters > spec.n_humans) {
    throw std::invalid_argument("n_clusters must lie in [1, n_humans]");
  }
  if (spec.cluster_spread < 0.0) throw std::invalid_argument("cluster_spread must be >= 0");
  for (double p : spec.cluster_skill) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("cluster skill must lie in [0, 1]");
  }
  for (const auto& mean : spec.cluster_means) {
    for (double v : mean) {
      if (v < -1.0 || v > 1.0) throw std::invalid_argument("ordinal cluster means must lie in [-1, 1]");
    }
  }
  if (spec.scheme == Scheme::continuous && spec.continuous_dim < 1) {
    throw std::invalid_argument("continuous_dim must be >= 1");
  }
}

}  // namespace

Population generate_population(const GeneratorSpec& spec) {
  check_generator_spec(spec);
  const int n = spec.n_humans;
  const int t = spec.n_tasks;
  const int c = spec.n_clusters;

  std::vector<std::string> tasks(t);
  for (int i = 0; i < t; ++i) tasks[i] = "t" + std::to_string(i);
  std::vector<std::string> human_ids(n);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    human_ids[i] = "h" + std::to_string(i);
    labels[i] = i % c;  // sizes as even as possible
  }

  // Cluster prototypes, then per-human within-cluster perturbation.
  rng::Stream proto(rng::derive(spec.seed, "prototypes"));
  std::vector<std::vector<ResponsePayload>> prototypes(c);
  switch (spec.scheme) {
    case Scheme::binary: {
      std::vector<double> skill = spec.cluster_skill;
      if (skill.empty()) {
        skill.resize(c);
        for (int k = 0; k < c; ++k) skill[k] = (k + 1.0) / (c + 1.0);
      } else if (static_cast<int>(skill.size()) != c) {
        throw std::invalid_argument("cluster_skill must have one entry per cluster");
      }
      for (int k = 0; k < c; ++k) {
        prototypes[k].reserve(t);
        for (int j = 0; j < t; ++j) {
          prototypes[k].push_back(BinaryAnswer{proto.bernoulli(skill[k]) ? 1 : 0});
        }
      }
      break;
    }
    case Scheme::ordinal: {
      std::vector<std::vector<double>> means = spec.cluster_means;
      if (means.empty()) {
        means.resize(c);
        for (int k = 0; k < c; ++k) {
          means[k].resize(t);
          for (int j = 0; j < t; ++j) means[k][j] = proto.uniform(-1.0, 1.0);
        }
      } else if (static_cast<int>(means.size()) != c) {
        throw std::invalid_argument("cluster_means must have one entry per cluster");
      }
      for (int k = 0; k < c; ++k) {
        if (static_cast<int>(means[k].size()) != t) {
          throw std::invalid_argument("each ordinal cluster mean needs one value per task");
        }
        prototypes[k].reserve(t);
        for (int j = 0; j < t; ++j) prototypes[k].push_back(OrdinalAnswer{means[k][j]});
      }
      break;
    }
    case Scheme::continuous: {
      for (int k = 0; k < c; ++k) {
        prototypes[k].reserve(t);
        for (int j = 0; j < t; ++j) {
          Eigen::VectorXd v(spec.continuous_dim);
          for (int a = 0; a < spec.continuous_dim; ++a) v[a] = proto.normal();
          prototypes[k].push_back(ContinuousAnswer{std::move(v)});
        }
      }
      break;
    }
  }

  std::vector<std::vector<ResponsePayload>> responses(n);
  for (int i = 0; i < n; ++i) {
    rng::Stream noise(rng::derive(spec.seed, "human", static_cast<std::uint64_t>(i)));
    const auto& base = prototypes[labels[i]];
    responses[i].reserve(t);
    for (int j = 0; j < t; ++j) {
      switch (spec.scheme) {
        case Scheme::binary: {
          int v = std::get<BinaryAnswer>(base[j]).value;
          if (noise.bernoulli(spec.cluster_spread)) v = 1 - v;
          responses[i].push_back(BinaryAnswer{v});
          break;
        }
        case Scheme::ordinal: {
          double v = std::get<OrdinalAnswer>(base[j]).value;
          v = std::clamp(v + spec.cluster_spread * noise.normal(), -1.0, 1.0);
          responses[i].push_back(OrdinalAnswer{v});
          break;
        }
        case Scheme::continuous: {
          Eigen::VectorXd v = std::get<ContinuousAnswer>(base[j]).value;
          for (Eigen::Index a = 0; a < v.size(); ++a) v[a] += spec.cluster_spread * noise.normal();
          responses[i].push_back(ContinuousAnswer{std::move(v)});
          break;
        }
      }
    }
  }

  auto [train_tasks, test_tasks] =
      draw_split(static_cast<std::size_t>(t), spec.train_fraction, spec.seed);
  return Population::build(spec.scheme, std::move(tasks), std::move(human_ids),
                           std::move(responses), std::move(train_tasks), std::move(test_tasks),
                           spec.aggregator, spec.d_max_override, std::move(labels));
}

}  // namespace repsel
