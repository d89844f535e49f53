#include "repsel/embedding.hpp"

#include <cmath>
#include <sstream>

namespace repsel {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::binary: return "binary";
    case Scheme::ordinal: return "ordinal";
    case Scheme::continuous: return "continuous";
  }
  return "?";
}

std::string to_string(Metric m) { return m == Metric::l1 ? "L1" : "L2"; }

Scheme scheme_from_string(const std::string& s) {
  if (s == "binary") return Scheme::binary;
  if (s == "ordinal") return Scheme::ordinal;
  if (s == "continuous") return Scheme::continuous;
  throw std::invalid_argument("unknown scheme: " + s);
}

Scheme payload_scheme(const ResponsePayload& payload) {
  if (std::holds_alternative<BinaryAnswer>(payload)) return Scheme::binary;
  if (std::holds_alternative<OrdinalAnswer>(payload)) return Scheme::ordinal;
  return Scheme::continuous;
}

void validate_payload(const ResponsePayload& payload, Scheme scheme) {
  if (payload_scheme(payload) != scheme) {
    throw std::invalid_argument("payload kind " + to_string(payload_scheme(payload)) +
                                " does not match population scheme " + to_string(scheme));
  }
  switch (scheme) {
    case Scheme::binary: {
      const int v = std::get<BinaryAnswer>(payload).value;
      if (v != 0 && v != 1) throw std::invalid_argument("binary response must be 0 or 1");
      break;
    }
    case Scheme::ordinal: {
      const double v = std::get<OrdinalAnswer>(payload).value;
      if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
        throw std::invalid_argument("ordinal response must be finite and in [-1, 1]");
      }
      break;
    }
    case Scheme::continuous: {
      const auto& v = std::get<ContinuousAnswer>(payload).value;
      if (v.size() == 0) throw std::invalid_argument("continuous response must be nonempty");
      if (!v.allFinite()) throw std::invalid_argument("continuous response must be finite");
      break;
    }
  }
}

double distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    std::ostringstream msg;
    msg << "distance: dimension mismatch (" << a.dim() << " vs " << b.dim() << ")";
    throw std::invalid_argument(msg.str());
  }
  if (a.metric != b.metric) {
    throw std::invalid_argument("distance: metric mismatch (" + to_string(a.metric) + " vs " +
                                to_string(b.metric) + ")");
  }
  return metric_distance(a.values, b.values, a.metric);
}

EmbeddingVector embed_from_responses(std::span<const ResponsePayload> responses_by_task,
                                     Scheme scheme, ContinuousAggregator aggregator) {
  const auto n = static_cast<Eigen::Index>(responses_by_task.size());
  for (const auto& p : responses_by_task) validate_payload(p, scheme);

  EmbeddingVector e;
  switch (scheme) {
    case Scheme::binary: {
      e.metric = Metric::l1;
      e.values.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        e.values[i] = std::get<BinaryAnswer>(responses_by_task[i]).value;
      }
      break;
    }
    case Scheme::ordinal: {
      e.metric = Metric::l2;
      e.values.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        e.values[i] = std::get<OrdinalAnswer>(responses_by_task[i]).value;
      }
      break;
    }
    case Scheme::continuous: {
      e.metric = Metric::l2;
      if (n == 0) break;
      const auto per_task = std::get<ContinuousAnswer>(responses_by_task[0]).value.size();
      for (Eigen::Index i = 1; i < n; ++i) {
        if (std::get<ContinuousAnswer>(responses_by_task[i]).value.size() != per_task) {
          throw std::invalid_argument("continuous per-task vectors must share one dimension");
        }
      }
      if (aggregator == ContinuousAggregator::mean) {
        e.values = Eigen::VectorXd::Zero(per_task);
        for (const auto& p : responses_by_task) e.values += std::get<ContinuousAnswer>(p).value;
        e.values /= static_cast<double>(n);
      } else {
        e.values.resize(per_task * n);
        for (Eigen::Index i = 0; i < n; ++i) {
          e.values.segment(i * per_task, per_task) =
              std::get<ContinuousAnswer>(responses_by_task[i]).value;
        }
      }
      break;
    }
  }
  return e;
}

EmbeddingVector embed_from_responses(const std::map<std::string, ResponsePayload>& responses,
                                     std::span<const std::string> task_order, Scheme scheme,
                                     ContinuousAggregator aggregator) {
  std::vector<ResponsePayload> ordered;
  ordered.reserve(task_order.size());
  for (const auto& task : task_order) {
    auto it = responses.find(task);
    if (it == responses.end()) {
      throw std::invalid_argument("missing response for task '" + task + "'");
    }
    ordered.push_back(it->second);
  }
  return embed_from_responses(ordered, scheme, aggregator);
}

double normalize_error(double gap, Scheme scheme, Eigen::Index dim) {
  if (gap < 0.0) throw std::invalid_argument("normalize_error: gap must be >= 0");
  if (dim < 1) throw std::invalid_argument("normalize_error: dim must be >= 1");
  if (scheme == Scheme::binary) return gap / static_cast<double>(dim);
  return gap / std::sqrt(static_cast<double>(dim));
}

void validate_embedding(const EmbeddingVector& e, Scheme scheme) {
  if (!e.values.allFinite()) throw std::invalid_argument("embedding has non-finite entries");
  if (scheme == Scheme::binary) {
    if (e.metric != Metric::l1) throw std::invalid_argument("binary embeddings use L1");
    for (Eigen::Index i = 0; i < e.dim(); ++i) {
      if (e.values[i] != 0.0 && e.values[i] != 1.0) {
        throw std::invalid_argument("binary embedding entries must be 0 or 1");
      }
    }
  } else {
    if (e.metric != Metric::l2) throw std::invalid_argument(to_string(scheme) + " embeddings use L2");
    if (scheme == Scheme::ordinal) {
      if ((e.values.array() < -1.0).any() || (e.values.array() > 1.0).any()) {
        throw std::invalid_argument("ordinal embedding entries must lie in [-1, 1]");
      }
    }
  }
}

}  // namespace repsel
