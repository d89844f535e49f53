#include <doctest.h>

#include <cmath>

#include "repsel/embedding.hpp"
#include "repsel/oracle.hpp"
#include "repsel/population.hpp"
#include "repsel/rng.hpp"
#include "test_support.hpp"

using namespace repsel;
using test_support::line_population;
using test_support::point_agent;

namespace {

std::vector<AgentSpec> spec_candidates() {
  std::vector<AgentSpec> candidates;
  int i = 0;
  for (double x : {0.0, 4.0, 5.0, 10.0}) {
    candidates.push_back(point_agent(x, "c" + std::to_string(i++)));
  }
  return candidates;
}

}  // namespace

TEST_CASE("brute force: full enumeration with lexicographic tie-break") {
  const auto pop = line_population({0, 4, 10}, 20.0);
  const auto best = brute_force_optimum(pop, spec_candidates(), 2);
  CHECK(best.objective_trace.back() == doctest::Approx(20.0 - 4.0 / 3.0));
  // {c1, c3} ties {c0, c3}; the lexicographically smaller pair wins
  REQUIRE(best.agents.size() == 2);
  CHECK(best.agents[0].id == "c0");
  CHECK(best.agents[1].id == "c3");
}

TEST_CASE("brute force: degenerate sizes") {
  const auto pop = line_population({0, 4, 10}, 20.0);
  const auto candidates = spec_candidates();

  const auto all = brute_force_optimum(pop, candidates, 4);
  CHECK(all.agents.size() == 4);

  const auto one = brute_force_optimum(pop, candidates, 1);
  REQUIRE(one.agents.size() == 1);
  CHECK(one.agents[0].id == "c1");  // [4] is the best singleton

  const auto none = brute_force_optimum(pop, candidates, 0);
  CHECK(none.agents.empty());
  CHECK(none.final_gap == doctest::Approx(20.0));
}

TEST_CASE("brute force: budget refusal is explicit") {
  const auto pop = line_population({0, 1}, 10.0);
  std::vector<AgentSpec> many;
  for (int i = 0; i < 30; ++i) many.push_back(point_agent(i * 0.1, "c" + std::to_string(i)));
  CHECK_THROWS_WITH_AS(brute_force_optimum(pop, many, 15, 1000),
                       doctest::Contains("budget"), std::runtime_error);
}

TEST_CASE("brute force dominates every heuristic on the same candidates") {
  rng::Stream stream(404);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> humans;
    for (int h = 0; h < 5; ++h) humans.push_back(stream.uniform(-3.0, 3.0));
    const auto pop = line_population(humans, 20.0);

    std::vector<AgentSpec> candidates;
    for (int c = 0; c < 8; ++c) {
      candidates.push_back(point_agent(stream.uniform(-3.0, 3.0), "c" + std::to_string(c)));
    }
    SelectorConfig cfg;
    cfg.m = 3;
    cfg.seed = stream.next_u64();
    const auto greedy = select_greedy_full(pop, candidates, cfg);
    const auto opt = brute_force_optimum(pop, candidates, 3);
    CHECK(opt.objective_trace.back() >= greedy.objective_trace.back() - 1e-12);
  }
}

TEST_CASE("submodularity check finds no violations and a zero-margin degenerate chain") {
  const auto pop = line_population({0, 2, 5, 9}, 20.0);
  const auto report = check_submodularity(pop, spec_candidates(), 1000, 5);
  CHECK(report.trials == 1000);
  CHECK(report.violations == 0);
  CHECK(report.worst_margin >= -1e-9);
  // A == B makes both sides identical, so the margin is exactly zero; the
  // sampled chains include empty B (hence A == B == {}) with certainty over
  // 1000 trials, and worst_margin can never drop below zero anyway.
  CHECK(report.worst_margin <= 0.0);
}

TEST_CASE("compute_gamma_rho: pool = humans gives gamma = 1") {
  const auto pop = line_population({0, 3, 8, 9}, 30.0, 2, 1);
  const NoisyProxyModel model(0.0);
  SelectorConfig cfg;
  cfg.m = 2;
  cfg.k = 1;
  cfg.seed = 3;
  const auto proxies = build_proxy_pool(pop, model, cfg, ProxyStrategy::uniform);
  const auto report = compute_gamma_rho(pop, proxies, 2, GammaPool::humans, &model, 3);
  CHECK(report.gamma == doctest::Approx(1.0));
  CHECK(report.rho_emp == doctest::Approx(0.0));
  CHECK(report.f_opt_full == doctest::Approx(report.f_opt_human));
  CHECK(report.pool == "humans");
}

TEST_CASE("compute_gamma_rho: noisy proxies bound rho by construction") {
  const auto pop = line_population({0, 3, 8, 9}, 30.0, 3, 1);
  const NoisyProxyModel model(0.3);
  SelectorConfig cfg;
  cfg.m = 2;
  cfg.k = 2;
  cfg.seed = 5;
  const auto proxies = build_proxy_pool(pop, model, cfg, ProxyStrategy::uniform);
  const auto report = compute_gamma_rho(pop, proxies, 2, GammaPool::humans, &model, 5);
  CHECK(report.rho_emp <= 0.3 + 1e-12);
}

TEST_CASE("compute_gamma_rho: single-owner context pool") {
  const auto pop = line_population({0, 4, 9}, 30.0, 2, 1);
  const NoisyProxyModel model(0.0);
  SelectorConfig cfg;
  cfg.m = 2;
  cfg.k = 1;
  cfg.seed = 1;
  const auto proxies = build_proxy_pool(pop, model, cfg, ProxyStrategy::uniform);
  const auto report =
      compute_gamma_rho(pop, proxies, 2, GammaPool::single_owner_contexts, &model, 1);
  CHECK(report.pool == "single-owner-contexts");
  // zero-noise single-owner contexts reproduce the humans, so the two optima
  // coincide here too
  CHECK(report.f_opt_full == doctest::Approx(report.f_opt_human));
}

TEST_CASE("verify_mapped_bound: zero-noise collapse to the plain greedy bound") {
  const auto pop = line_population({0, 1, 6, 7}, 30.0, 2, 1);
  const NoisyProxyModel model(0.0);
  SelectorConfig cfg;
  cfg.m = 2;
  cfg.k = 1;
  cfg.seed = 9;
  const auto report = verify_mapped_bound(pop, model, cfg, ProxyStrategy::uniform);
  CHECK(report.gamma == doctest::Approx(1.0));
  CHECK(report.rho_emp == doctest::Approx(0.0));
  const double expected_bound = (1.0 - 1.0 / std::exp(1.0)) * report.f_opt_human;
  CHECK(report.bound_value == doctest::Approx(expected_bound).epsilon(1e-12));
  CHECK(report.satisfied);
  CHECK_FALSE(report.vacuous);
}

TEST_CASE("verify_mapped_bound: adversarially large rho is vacuous but satisfied") {
  const auto pop = line_population({0.0, 0.1, 0.2}, 5.0, 2, 1);
  const NoisyProxyModel model(50.0);  // rho dwarfs every f term
  SelectorConfig cfg;
  cfg.m = 1;
  cfg.k = 1;
  cfg.seed = 2;
  const auto report = verify_mapped_bound(pop, model, cfg, ProxyStrategy::uniform);
  CHECK(report.bound_value <= 0.0);
  CHECK(report.vacuous);
  CHECK(report.satisfied);  // f is nonnegative
}

TEST_CASE("bound report arithmetic is internally consistent") {
  const auto pop = line_population({0, 2, 5, 6}, 30.0, 2, 1);
  const NoisyProxyModel model(0.3);
  SelectorConfig cfg;
  cfg.m = 2;
  cfg.k = 1;
  cfg.seed = 12;
  const auto report = verify_mapped_bound(pop, model, cfg, ProxyStrategy::greedy);
  const double recomputed =
      (1.0 - 1.0 / std::exp(1.0)) * (report.gamma * report.f_opt_full - report.rho_emp);
  CHECK(report.bound_value == doctest::Approx(recomputed).epsilon(1e-12));
  CHECK(report.gamma == doctest::Approx(report.f_opt_human / report.f_opt_full).epsilon(1e-12));
  CHECK(report.satisfied == (report.f_method >= report.bound_value - 1e-9));
}

TEST_CASE("sweep harnesses stay clean on small runs") {
  const auto submod = run_submodularity_sweep(10, 20, 1);
  CHECK(submod.instances == 10);
  CHECK(submod.violations == 0);
  CHECK(submod.worst_margin >= -1e-9);

  const auto greedy = run_greedy_bound_sweep(20, 2);
  CHECK(greedy.instances == 20);
  CHECK(greedy.failures == 0);
  CHECK(greedy.min_ratio >= 1.0 - 1.0 / std::exp(1.0) - 1e-9);

  const auto mapped = run_mapped_bound_sweep(10, {0.0, 0.1, 0.3}, 3);
  CHECK(mapped.instances == 10);
  CHECK(mapped.failures == 0);
  CHECK(mapped.refusals == 0);
  for (const auto& report : mapped.reports) {
    CHECK(report.satisfied);
  }
}
