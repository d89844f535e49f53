#include "repsel/kmedoids.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace repsel {

namespace {

double clustering_cost(const Eigen::MatrixXd& d, const std::vector<std::size_t>& medoids) {
  double cost = 0.0;
  for (Eigen::Index p = 0; p < d.rows(); ++p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m : medoids) best = std::min(best, d(p, static_cast<Eigen::Index>(m)));
    cost += best;
  }
  return cost;
}

}  // namespace

PamResult pam_cluster(const Eigen::MatrixXd& d, std::size_t k, int max_swap_iterations) {
  const auto n = static_cast<std::size_t>(d.rows());
  if (d.rows() != d.cols()) throw std::invalid_argument("pam_cluster: matrix must be square");
  if (k == 0 || k > n) throw std::invalid_argument("pam_cluster: k must lie in [1, n]");

  PamResult result;

  // BUILD: start from the most central point, then add the point with the
  // largest cost reduction.
  std::vector<bool> is_medoid(n, false);
  {
    std::size_t central = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < n; ++p) {
      const double total = d.row(static_cast<Eigen::Index>(p)).sum();
      if (total < best) {
        best = total;
        central = p;
      }
    }
    result.medoids.push_back(central);
    is_medoid[central] = true;
  }
  std::vector<double> nearest(n);
  for (std::size_t p = 0; p < n; ++p) {
    nearest[p] = d(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(result.medoids[0]));
  }
  while (result.medoids.size() < k) {
    std::size_t best_point = n;
    double best_profit = -1.0;
    for (std::size_t cand = 0; cand < n; ++cand) {
      if (is_medoid[cand]) continue;
      double profit = 0.0;
      for (std::size_t p = 0; p < n; ++p) {
        const double dist = d(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(cand));
        if (dist < nearest[p]) profit += nearest[p] - dist;
      }
      if (profit > best_profit) {
        best_profit = profit;
        best_point = cand;
      }
    }
    is_medoid[best_point] = true;
    result.medoids.push_back(best_point);
    for (std::size_t p = 0; p < n; ++p) {
      nearest[p] = std::min(nearest[p], d(static_cast<Eigen::Index>(p),
                                          static_cast<Eigen::Index>(best_point)));
    }
  }

  // SWAP: greedy best-improvement swaps until stable or the iteration cap.
  double current_cost = clustering_cost(d, result.medoids);
  for (int iter = 0; iter < max_swap_iterations; ++iter) {
    double best_cost = current_cost;
    std::size_t best_slot = 0;
    std::size_t best_point = n;
    for (std::size_t slot = 0; slot < result.medoids.size(); ++slot) {
      for (std::size_t cand = 0; cand < n; ++cand) {
        if (is_medoid[cand]) continue;
        std::vector<std::size_t> trial = result.medoids;
        trial[slot] = cand;
        const double cost = clustering_cost(d, trial);
        if (cost < best_cost - 1e-12) {
          best_cost = cost;
          best_slot = slot;
          best_point = cand;
        }
      }
    }
    if (best_point == n) break;
    is_medoid[result.medoids[best_slot]] = false;
    is_medoid[best_point] = true;
    result.medoids[best_slot] = best_point;
    current_cost = best_cost;
    result.swap_iterations = iter + 1;
  }

  std::sort(result.medoids.begin(), result.medoids.end());
  result.total_cost = current_cost;
  result.assignment.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t best_slot = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t slot = 0; slot < result.medoids.size(); ++slot) {
      const double dist =
          d(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(result.medoids[slot]));
      if (dist < best) {
        best = dist;
        best_slot = slot;
      }
    }
    result.assignment[p] = best_slot;
  }
  return result;
}

}  // namespace repsel
