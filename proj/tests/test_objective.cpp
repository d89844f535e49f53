#include <doctest.h>

#include "repsel/embedding.hpp"
#include "repsel/objective.hpp"
#include "repsel/oracle.hpp"
#include "repsel/rng.hpp"
#include "test_support.hpp"

using namespace repsel;
using test_support::point_agent;
using test_support::vec1;

namespace {

std::vector<EmbeddingVector> points(std::initializer_list<double> xs) {
  std::vector<EmbeddingVector> out;
  for (double x : xs) out.push_back(vec1(x));
  return out;
}

}  // namespace

TEST_CASE("representation gap: hand instances") {
  const auto humans = points({0, 4});
  CHECK(representation_gap(humans, points({1}), 10.0) == doctest::Approx(2.0));
  CHECK(representation_gap(humans, {}, 10.0) == doctest::Approx(10.0));
  CHECK(representation_gap(humans, humans, 10.0) == doctest::Approx(0.0));
}

TEST_CASE("objective value: gap reduction over the empty baseline") {
  const auto humans = points({0, 4});
  CHECK(objective_value(humans, points({1}), 10.0) == doctest::Approx(8.0));
  CHECK(objective_value(humans, {}, 10.0) == doctest::Approx(0.0));
  CHECK(objective_value(humans, humans, 10.0) == doctest::Approx(10.0));
}

TEST_CASE("marginal gain against a cache") {
  MinDistCache cache(points({0, 4}), 10.0);

  SUBCASE("empty-set state equals f of the singleton") {
    CHECK(cache.marginal_gain(vec1(0)) == doctest::Approx(8.0));
  }

  SUBCASE("after committing [1]") {
    cache.commit(vec1(1), "a0");
    CHECK(cache.marginal_gain(vec1(4)) == doctest::Approx(1.5));
    CHECK(cache.marginal_gain(vec1(1)) == doctest::Approx(0.0));  // already in L
  }
}

TEST_CASE("commit is idempotent and order-independent") {
  const auto humans = points({0, 3, 9});
  MinDistCache a(humans, 15.0);
  a.commit(vec1(1), "x");
  CHECK(a.marginal_gain(vec1(1)) == doctest::Approx(0.0));

  MinDistCache b(humans, 15.0);
  a.commit(vec1(8), "y");
  b.commit(vec1(8), "y");
  b.commit(vec1(1), "x");
  for (std::size_t h = 0; h < humans.size(); ++h) {
    CHECK(a.min_dist(h) == doctest::Approx(b.min_dist(h)).epsilon(1e-15));
  }
  CHECK(a.objective() == doctest::Approx(b.objective()).epsilon(1e-15));
}

TEST_CASE("cache equals naive recomputation after random commit sequences") {
  rng::Stream stream(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index dim = 1 + static_cast<Eigen::Index>(stream.below(4));
    const std::size_t n_humans = 2 + stream.below(6);
    const double d_max = 4.0 * static_cast<double>(dim);  // valid for the [-1,1] box

    std::vector<EmbeddingVector> humans;
    for (std::size_t h = 0; h < n_humans; ++h) {
      EmbeddingVector e;
      e.metric = Metric::l2;
      e.values.resize(dim);
      for (Eigen::Index i = 0; i < dim; ++i) e.values[i] = stream.uniform(-1.0, 1.0);
      humans.push_back(std::move(e));
    }

    MinDistCache cache(humans, d_max);
    std::vector<EmbeddingVector> committed;
    const int commits = 1 + static_cast<int>(stream.below(8));
    for (int c = 0; c < commits; ++c) {
      EmbeddingVector candidate;
      candidate.metric = Metric::l2;
      candidate.values.resize(dim);
      for (Eigen::Index i = 0; i < dim; ++i) candidate.values[i] = stream.uniform(-1.0, 1.0);

      const double predicted = cache.objective() + cache.marginal_gain(candidate);
      cache.commit(candidate, "c" + std::to_string(c));
      committed.push_back(candidate);

      const double naive = objective_value(humans, committed, d_max);
      CHECK(cache.objective() == doctest::Approx(naive).epsilon(1e-12));
      CHECK(predicted == doctest::Approx(naive).epsilon(1e-12));
    }
    cache.resync();
    CHECK(cache.objective() == doctest::Approx(objective_value(humans, committed, d_max)));
  }
}

TEST_CASE("monotonicity on random nested sets") {
  rng::Stream stream(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto humans = points({stream.uniform(-1, 1), stream.uniform(-1, 1),
                                stream.uniform(-1, 1)});
    std::vector<EmbeddingVector> a, b;
    const int nb = 1 + static_cast<int>(stream.below(5));
    for (int i = 0; i < nb; ++i) {
      b.push_back(vec1(stream.uniform(-1, 1)));
      if (stream.bernoulli(0.5)) a.push_back(b.back());
    }
    CHECK(objective_value(humans, a, 8.0) <= objective_value(humans, b, 8.0) + 1e-12);
  }
}

TEST_CASE("duality: argmax f equals argmin g under the same tie-breaking") {
  rng::Stream stream(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> positions;
    for (int h = 0; h < 4; ++h) positions.push_back(stream.uniform(-2.0, 2.0));
    const auto pop = test_support::line_population(positions, 10.0);

    std::vector<AgentSpec> candidates;
    for (int c = 0; c < 5; ++c) {
      candidates.push_back(point_agent(stream.uniform(-2.0, 2.0), "c" + std::to_string(c)));
    }
    const int m = 2;
    const auto best = brute_force_optimum(pop, candidates, m);

    // independent argmin-g enumeration
    const auto humans = pop.train_embeddings();
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      for (std::size_t j = i + 1; j < candidates.size(); ++j) {
        std::vector<EmbeddingVector> agents = {candidates[i].embedding, candidates[j].embedding};
        best_gap = std::min(best_gap, representation_gap(humans, agents, pop.d_max()));
      }
    }
    // the f-maximizer attains the minimal gap, and the values are dual
    REQUIRE(best.agents.size() == 2);
    CHECK(best.final_gap == doctest::Approx(best_gap).epsilon(1e-12));
    CHECK(best.objective_trace.back() ==
          doctest::Approx(pop.d_max() - best_gap).epsilon(1e-12));
  }
}

TEST_CASE("valid d_max shifts cannot change selections") {
  const auto pop_a = test_support::line_population({0, 1, 5, 6, 9}, 20.0);
  const auto pop_b = test_support::line_population({0, 1, 5, 6, 9}, 35.0);
  std::vector<AgentSpec> candidates;
  for (double x : {0.5, 2.0, 5.5, 8.0, 9.0}) {
    candidates.push_back(point_agent(x, "c" + std::to_string(candidates.size())));
  }
  SelectorConfig cfg;
  cfg.m = 2;
  const auto greedy_a = select_greedy_full(pop_a, candidates, cfg);
  const auto greedy_b = select_greedy_full(pop_b, candidates, cfg);
  REQUIRE(greedy_a.agents.size() == greedy_b.agents.size());
  for (std::size_t i = 0; i < greedy_a.agents.size(); ++i) {
    CHECK(greedy_a.agents[i].id == greedy_b.agents[i].id);
  }
  const auto opt_a = brute_force_optimum(pop_a, candidates, 2);
  const auto opt_b = brute_force_optimum(pop_b, candidates, 2);
  for (std::size_t i = 0; i < opt_a.agents.size(); ++i) {
    CHECK(opt_a.agents[i].id == opt_b.agents[i].id);
  }
}
