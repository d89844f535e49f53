#include <doctest.h>

#include <cmath>

#include "repsel/kmedoids.hpp"
#include "repsel/rng.hpp"

using namespace repsel;

namespace {

Eigen::MatrixXd line_matrix(const std::vector<double>& xs) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = std::abs(xs[i] - xs[j]);
  }
  return d;
}

// reference: enumerate every medoid set
double exhaustive_cost(const Eigen::MatrixXd& d, std::size_t k) {
  const auto n = static_cast<std::size_t>(d.rows());
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    double cost = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t m : pick) nearest = std::min(nearest, d(p, m));
      cost += nearest;
    }
    best = std::min(best, cost);

    std::size_t slot = k;
    while (slot > 0 && pick[slot - 1] == n - (k - (slot - 1))) --slot;
    if (slot == 0) break;
    --slot;
    ++pick[slot];
    for (std::size_t j = slot + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

}  // namespace

TEST_CASE("two well-separated groups split cleanly") {
  const auto d = line_matrix({0, 1, 10, 11});
  const auto result = pam_cluster(d, 2);
  CHECK(result.assignment[0] == result.assignment[1]);
  CHECK(result.assignment[2] == result.assignment[3]);
  CHECK(result.assignment[0] != result.assignment[2]);
  // one medoid per group
  CHECK(result.medoids[0] <= 1);
  CHECK(result.medoids[1] >= 2);
  CHECK(result.total_cost == doctest::Approx(exhaustive_cost(d, 2)));
}

TEST_CASE("k = n puts every point in its own cluster") {
  const auto d = line_matrix({0, 2, 5, 9});
  const auto result = pam_cluster(d, 4);
  CHECK(result.medoids == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(result.total_cost == doctest::Approx(0.0));
}

TEST_CASE("k = 1 selects the 1-median") {
  const auto d = line_matrix({0, 1, 2, 50});
  const auto result = pam_cluster(d, 1);
  REQUIRE(result.medoids.size() == 1);
  CHECK(result.medoids[0] == 1);  // minimizes total distance
  for (std::size_t p = 0; p < 4; ++p) CHECK(result.assignment[p] == 0);
}

TEST_CASE("PAM tracks the exhaustive optimum on random small instances") {
  // Single-swap PAM can stall in local optima (two coordinated swaps away
  // from the true optimum), so the comparison leaves heuristic headroom.
  rng::Stream stream(77);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> xs;
    const std::size_t n = 5 + stream.below(4);
    for (std::size_t i = 0; i < n; ++i) xs.push_back(stream.uniform(0.0, 10.0));
    const auto d = line_matrix(xs);
    const std::size_t k = 1 + stream.below(3);
    const auto result = pam_cluster(d, k);
    const double opt = exhaustive_cost(d, k);
    CHECK(result.total_cost >= opt - 1e-9);  // the enumeration really is a lower bound
    CHECK(result.total_cost <= opt * 1.25 + 1e-9);

    const auto again = pam_cluster(d, k);
    CHECK(again.medoids == result.medoids);
    CHECK(again.assignment == result.assignment);
  }
}

TEST_CASE("invalid arguments are rejected") {
  const auto d = line_matrix({0, 1, 2});
  CHECK_THROWS_AS(pam_cluster(d, 0), std::invalid_argument);
  CHECK_THROWS_AS(pam_cluster(d, 4), std::invalid_argument);
  CHECK_THROWS_AS(pam_cluster(Eigen::MatrixXd::Zero(2, 3), 1), std::invalid_argument);
}
