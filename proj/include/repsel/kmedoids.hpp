#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace repsel {

struct PamResult {
  std::vector<std::size_t> medoids;     // ascending point indices
  std::vector<std::size_t> assignment;  // point -> position in medoids
  double total_cost = 0.0;
  int swap_iterations = 0;
};

/// Classical PAM (BUILD + SWAP) on a symmetric dissimilarity matrix.
/// Deterministic: ties always resolve to the lowest point index.
PamResult pam_cluster(const Eigen::MatrixXd& dissimilarity, std::size_t k,
                      int max_swap_iterations = 100);

}  // namespace repsel
