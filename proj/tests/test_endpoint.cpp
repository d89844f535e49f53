#include <doctest.h>

#include "repsel/embedding.hpp"
#include "repsel/endpoint.hpp"
#include "repsel/experiment.hpp"
#include "repsel/population.hpp"

#include <atomic>
#include <httplib.h>
#include <json.hpp>
#include <thread>

using namespace repsel;
using nlohmann::json;

namespace {

Population tiny_population() {
  GeneratorSpec spec;
  spec.scheme = Scheme::binary;
  spec.n_humans = 4;
  spec.n_tasks = 4;
  spec.n_clusters = 2;
  spec.seed = 8;
  return generate_population(spec);
}

// In-process stand-in for a chat-completion service.
class FakeServer {
 public:
  explicit FakeServer(std::function<std::string(const json&)> reply) {
    server_.Post("/v1/chat/completions", [this, reply](const httplib::Request& req,
                                                       httplib::Response& res) {
      last_body_ = req.body;
      ++hits_;
      json parsed = json::parse(req.body);
      res.set_content(reply(parsed), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::string last_body() const { return last_body_; }
  int hits() const { return hits_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::string last_body_;
  std::atomic<int> hits_{0};
};

EndpointConfig config_for(const FakeServer& server) {
  EndpointConfig config;
  config.base_url = server.url();
  config.model = "test-model";
  config.temperature = 1.0;
  config.timeout_sec = 5.0;
  config.retries = 1;
  return config;
}

}  // namespace

TEST_CASE("endpoint: request carries model, temperature and rendered messages") {
  const auto pop = tiny_population();
  FakeServer server([](const json&) {
    return json{{"choices", json::array({json{{"message", json{{"content", "1"}}}}})}}.dump();
  });
  EndpointModel model(config_for(server));

  std::vector<std::uint32_t> context = {pop.demos_of(0)[0], pop.demos_of(1)[0]};
  const auto payload = model.respond(pop, context, pop.test_tasks()[0], 0);
  CHECK(std::get<BinaryAnswer>(payload).value == 1);

  const json sent = json::parse(server.last_body());
  CHECK(sent["model"] == "test-model");
  CHECK(sent["temperature"] == 1.0);
  REQUIRE(sent["messages"].is_array());
  REQUIRE(sent["messages"].size() == 1);
  CHECK(sent["messages"][0]["role"] == "user");
  const std::string content = sent["messages"][0]["content"].get<std::string>();
  // both demonstrations and the probe task appear in the prompt
  CHECK(content.find(pop.task_id(pop.demo(context[0]).task)) != std::string::npos);
  CHECK(content.find(pop.task_id(pop.test_tasks()[0])) != std::string::npos);
}

TEST_CASE("endpoint: out-of-scheme replies are rejected, not imputed") {
  const auto pop = tiny_population();
  FakeServer server([](const json&) { return json{{"content", "maybe"}}.dump(); });
  EndpointModel model(config_for(server));
  std::vector<std::uint32_t> context = {pop.demos_of(0)[0]};
  CHECK_THROWS_WITH_AS(model.respond(pop, context, 0, 0), doctest::Contains("not a 0/1"),
                       std::runtime_error);
}

TEST_CASE("endpoint: parse_reply accepts both body shapes and enforces ranges") {
  CHECK(std::get<BinaryAnswer>(EndpointModel::parse_reply(R"({"content":"0"})", Scheme::binary))
            .value == 0);
  const auto openai_style =
      json{{"choices", json::array({json{{"message", json{{"content", "0.25"}}}}})}}.dump();
  CHECK(std::get<OrdinalAnswer>(EndpointModel::parse_reply(openai_style, Scheme::ordinal)).value ==
        doctest::Approx(0.25));
  const auto vec = EndpointModel::parse_reply(R"({"content":"[1.5, 2.5]"})", Scheme::continuous);
  CHECK(std::get<ContinuousAnswer>(vec).value[1] == doctest::Approx(2.5));

  CHECK_THROWS_AS(EndpointModel::parse_reply(R"({"content":"2"})", Scheme::binary),
                  std::runtime_error);
  CHECK_THROWS_AS(EndpointModel::parse_reply(R"({"content":"1.5"})", Scheme::ordinal),
                  std::runtime_error);
  CHECK_THROWS_AS(EndpointModel::parse_reply(R"({"content":"[]"})", Scheme::continuous),
                  std::runtime_error);
  CHECK_THROWS_AS(EndpointModel::parse_reply("not json", Scheme::binary), std::runtime_error);
  CHECK_THROWS_AS(EndpointModel::parse_reply(R"({"nope": 1})", Scheme::binary),
                  std::runtime_error);
}

TEST_CASE("endpoint: 5xx retries then succeeds") {
  const auto pop = tiny_population();
  std::atomic<int> calls{0};
  httplib::Server server;
  server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    if (calls.fetch_add(1) == 0) {
      res.status = 503;
      return;
    }
    res.set_content(json{{"content", "1"}}.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  EndpointConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(port);
  config.retries = 2;
  config.timeout_sec = 5.0;
  EndpointModel model(config);
  std::vector<std::uint32_t> context = {pop.demos_of(0)[0]};
  const auto payload = model.respond(pop, context, 0, 0);
  CHECK(std::get<BinaryAnswer>(payload).value == 1);
  CHECK(calls.load() == 2);

  server.stop();
  thread.join();
}

TEST_CASE("endpoint: drives a full experiment cell through make_behavior_model") {
  FakeServer server([](const json&) { return json{{"content", "1"}}.dump(); });

  RunConfig config;
  GeneratorSpec gen;
  gen.scheme = Scheme::binary;
  gen.n_humans = 4;
  gen.n_tasks = 4;
  gen.n_clusters = 2;
  gen.seed = 8;
  config.generator = gen;
  config.methods = {"random"};
  config.m_values = {2};
  config.k = 2;
  config.seeds = {1};
  config.behavior.kind = "endpoint";
  config.behavior.endpoint_url = server.url();
  config.behavior.retries = 0;

  const auto pop = resolve_population(config);
  const auto cells = execute_cells(config, pop);
  REQUIRE(cells.size() == 1);
  CAPTURE(cells[0].error_message);
  CHECK(cells[0].ok);
  CHECK(server.hits() == 2 * 2 + 2 * 2);  // two agents on both splits
}

TEST_CASE("endpoint: unreachable hosts fail with the transport error") {
  const auto pop = tiny_population();
  EndpointConfig config;
  config.base_url = "http://127.0.0.1:1";  // nothing listens there
  config.retries = 0;
  config.timeout_sec = 0.5;
  EndpointModel model(config);
  std::vector<std::uint32_t> context = {pop.demos_of(0)[0]};
  CHECK_THROWS_WITH_AS(model.respond(pop, context, 0, 0), doctest::Contains("unreachable"),
                       std::runtime_error);
}
