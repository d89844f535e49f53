#include <doctest.h>

#include <map>

#include "repsel/embedding.hpp"
#include "repsel/rng.hpp"

using namespace repsel;

namespace {

EmbeddingVector vec(std::initializer_list<double> values, Metric metric) {
  EmbeddingVector e;
  e.values = Eigen::VectorXd(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) e.values[i++] = v;
  e.metric = metric;
  return e;
}

}  // namespace

TEST_CASE("distance definitions") {
  CHECK(distance(vec({1, 0, 1}, Metric::l1), vec({1, 1, 1}, Metric::l1)) == doctest::Approx(1.0));
  CHECK(distance(vec({0, 0}, Metric::l2), vec({3, 4}, Metric::l2)) == doctest::Approx(5.0));
  const auto x = vec({0.3, -0.7, 0.1}, Metric::l2);
  CHECK(distance(x, x) == 0.0);
}

TEST_CASE("distance contract violations") {
  CHECK_THROWS_AS(distance(vec({1, 0}, Metric::l1), vec({1, 0, 1}, Metric::l1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(distance(vec({1, 0}, Metric::l1), vec({1, 0}, Metric::l2)),
                  std::invalid_argument);
}

TEST_CASE("distance is symmetric and obeys the triangle inequality") {
  rng::Stream stream(42);
  for (int trial = 0; trial < 500; ++trial) {
    const Metric metric = trial % 2 == 0 ? Metric::l1 : Metric::l2;
    const Eigen::Index dim = 1 + static_cast<Eigen::Index>(stream.below(6));
    auto draw = [&] {
      EmbeddingVector e;
      e.metric = metric;
      e.values.resize(dim);
      for (Eigen::Index i = 0; i < dim; ++i) e.values[i] = stream.uniform(-2.0, 2.0);
      return e;
    };
    const auto a = draw();
    const auto b = draw();
    const auto c = draw();
    CHECK(distance(a, b) == doctest::Approx(distance(b, a)).epsilon(1e-12));
    CHECK(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9);
  }
}

TEST_CASE("L1 symmetry is exact on integer vectors") {
  rng::Stream stream(7);
  for (int trial = 0; trial < 100; ++trial) {
    EmbeddingVector a, b;
    a.metric = b.metric = Metric::l1;
    a.values.resize(5);
    b.values.resize(5);
    for (Eigen::Index i = 0; i < 5; ++i) {
      a.values[i] = static_cast<double>(stream.below(2));
      b.values[i] = static_cast<double>(stream.below(2));
    }
    CHECK(distance(a, b) == distance(b, a));
  }
}

TEST_CASE("embed_from_responses direct encodings") {
  const std::vector<std::string> tasks = {"t1", "t2", "t3"};
  std::map<std::string, ResponsePayload> binary = {
      {"t1", BinaryAnswer{1}}, {"t2", BinaryAnswer{0}}, {"t3", BinaryAnswer{1}}};
  auto e = embed_from_responses(binary, tasks, Scheme::binary);
  CHECK(e.metric == Metric::l1);
  CHECK(e.values[0] == 1.0);
  CHECK(e.values[1] == 0.0);
  CHECK(e.values[2] == 1.0);

  const std::vector<std::string> two = {"t1", "t2"};
  std::map<std::string, ResponsePayload> ordinal = {{"t1", OrdinalAnswer{-1.0}},
                                                    {"t2", OrdinalAnswer{0.5}}};
  auto o = embed_from_responses(ordinal, two, Scheme::ordinal);
  CHECK(o.metric == Metric::l2);
  CHECK(o.values[0] == -1.0);
  CHECK(o.values[1] == 0.5);
}

TEST_CASE("continuous mean aggregation matches a per-coordinate average") {
  Eigen::VectorXd a(2), b(2);
  a << 1, 0;
  b << 0, 1;
  std::vector<ResponsePayload> responses = {ContinuousAnswer{a}, ContinuousAnswer{b}};
  const auto e = embed_from_responses(responses, Scheme::continuous, ContinuousAggregator::mean);

  // independent oracle: average each coordinate by hand
  Eigen::VectorXd expected(2);
  for (Eigen::Index i = 0; i < 2; ++i) {
    expected[i] = (a[i] + b[i]) / 2.0;
  }
  CHECK(e.values.isApprox(expected));
  CHECK(e.values[0] == doctest::Approx(0.5));
  CHECK(e.values[1] == doctest::Approx(0.5));

  const auto cat = embed_from_responses(responses, Scheme::continuous, ContinuousAggregator::concat);
  CHECK(cat.dim() == 4);
  CHECK(cat.values[0] == 1.0);
  CHECK(cat.values[3] == 1.0);
}

TEST_CASE("missing responses are a hard error") {
  const std::vector<std::string> tasks = {"t1", "t2"};
  std::map<std::string, ResponsePayload> partial = {{"t1", BinaryAnswer{1}}};
  CHECK_THROWS_WITH_AS(embed_from_responses(partial, tasks, Scheme::binary),
                       "missing response for task 't2'", std::invalid_argument);
}

TEST_CASE("embed_from_responses ignores map insertion order") {
  const std::vector<std::string> tasks = {"a", "b", "c", "d"};
  std::map<std::string, ResponsePayload> forward, backward;
  for (int i = 0; i < 4; ++i) forward.emplace(tasks[i], OrdinalAnswer{0.1 * i});
  for (int i = 3; i >= 0; --i) backward.emplace(tasks[i], OrdinalAnswer{0.1 * i});
  const auto x = embed_from_responses(forward, tasks, Scheme::ordinal);
  const auto y = embed_from_responses(backward, tasks, Scheme::ordinal);
  CHECK(x.values == y.values);
}

TEST_CASE("normalize_error divides by d for binary and sqrt(d) otherwise") {
  CHECK(normalize_error(8.0, Scheme::binary, 40) == doctest::Approx(0.2));
  CHECK(normalize_error(5.0, Scheme::ordinal, 25) == doctest::Approx(1.0));
  CHECK(normalize_error(5.0, Scheme::continuous, 25) == doctest::Approx(1.0));
  CHECK(normalize_error(0.0, Scheme::binary, 3) == 0.0);
  CHECK_THROWS_AS(normalize_error(-1.0, Scheme::binary, 3), std::invalid_argument);
  CHECK_THROWS_AS(normalize_error(1.0, Scheme::binary, 0), std::invalid_argument);
}

TEST_CASE("payload validation enforces scheme ranges") {
  CHECK_THROWS_AS(validate_payload(BinaryAnswer{2}, Scheme::binary), std::invalid_argument);
  CHECK_THROWS_AS(validate_payload(OrdinalAnswer{1.5}, Scheme::ordinal), std::invalid_argument);
  CHECK_THROWS_AS(validate_payload(BinaryAnswer{1}, Scheme::ordinal), std::invalid_argument);
  CHECK_NOTHROW(validate_payload(OrdinalAnswer{-1.0}, Scheme::ordinal));
}
