#include "repsel/objective.hpp"

#include <numeric>

#include "repsel/embedding.hpp"

namespace repsel {

double representation_gap(std::span<const EmbeddingVector> humans,
                          std::span<const EmbeddingVector> agents, double d_max) {
  if (humans.empty()) throw std::invalid_argument("representation_gap: no humans");
  if (agents.empty()) return d_max;
  double sum = 0.0;
  for (const auto& h : humans) {
    double best = distance(h, agents[0]);
    for (std::size_t i = 1; i < agents.size(); ++i) {
      best = std::min(best, distance(h, agents[i]));
    }
    sum += best;
  }
  return sum / static_cast<double>(humans.size());
}

double objective_value(std::span<const EmbeddingVector> humans,
                       std::span<const EmbeddingVector> agents, double d_max) {
  return d_max - representation_gap(humans, agents, d_max);
}

MinDistCache::MinDistCache(std::vector<EmbeddingVector> humans, double d_max)
    : humans_(std::move(humans)), d_max_(d_max) {
  if (humans_.empty()) throw std::invalid_argument("MinDistCache: no humans");
  if (d_max_ <= 0.0) throw std::invalid_argument("MinDistCache: d_max must be positive");
  min_dist_.assign(humans_.size(), d_max_);
  sum_ = d_max_ * static_cast<double>(humans_.size());
}

double MinDistCache::marginal_gain(const EmbeddingVector& candidate) const {
  double gain = 0.0;
  for (std::size_t h = 0; h < humans_.size(); ++h) {
    const double d = distance(humans_[h], candidate);
    if (d < min_dist_[h]) gain += min_dist_[h] - d;
  }
  return gain / static_cast<double>(humans_.size());
}

void MinDistCache::commit(const EmbeddingVector& candidate, std::string agent_id) {
  for (std::size_t h = 0; h < humans_.size(); ++h) {
    const double d = distance(humans_[h], candidate);
    if (d < min_dist_[h]) {
      sum_ -= min_dist_[h] - d;
      min_dist_[h] = d;
    }
  }
  selected_.push_back(std::move(agent_id));
}

void MinDistCache::resync() {
  sum_ = std::accumulate(min_dist_.begin(), min_dist_.end(), 0.0);
}

}  // namespace repsel
