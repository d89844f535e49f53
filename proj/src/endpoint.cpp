#ifdef REPSEL_WITH_ENDPOINT

#include "repsel/endpoint.hpp"

#include <chrono>
#include <cmath>
#include <httplib.h>
#include <json.hpp>
#include <semaphore>
#include <sstream>
#include <thread>

namespace repsel {

using nlohmann::json;

namespace {

std::string render_answer(const ResponsePayload& payload) {
  if (const auto* b = std::get_if<BinaryAnswer>(&payload)) return std::to_string(b->value);
  if (const auto* o = std::get_if<OrdinalAnswer>(&payload)) {
    std::ostringstream out;
    out << o->value;
    return out.str();
  }
  const auto& v = std::get<ContinuousAnswer>(payload).value;
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr.dump();
}

std::string instruction_for(const std::string& template_id) {
  if (template_id == "performance") {
    return "Evaluate whether the student's previous answers reveal any misconceptions. "
           "If so, analyze those misconceptions before proceeding. If not, directly predict "
           "how the student would answer the following question. Respond with 1 if the "
           "student would answer correctly and 0 otherwise.";
  }
  if (template_id == "opinion") {
    return "Act as the human who has given the answers above. Answer the following question. "
           "Respond with a single number in [-1, 1].";
  }
  return "Act as the human who has given the answers above. Answer the following task. "
         "Respond with a JSON array of numbers.";
}

std::string default_template(Scheme scheme) {
  switch (scheme) {
    case Scheme::binary: return "performance";
    case Scheme::ordinal: return "opinion";
    case Scheme::continuous: return "semantic";
  }
  return "semantic";
}

}  // namespace

struct EndpointModel::Impl {
  EndpointConfig config;
  mutable std::counting_semaphore<256> in_flight;

  explicit Impl(EndpointConfig cfg)
      : config(std::move(cfg)), in_flight(std::max(1, std::min(config.max_in_flight, 256))) {}
};

EndpointModel::EndpointModel(EndpointConfig config) {
  if (config.base_url.empty()) throw std::invalid_argument("endpoint base_url required");
  if (config.retries < 0) throw std::invalid_argument("retries must be >= 0");
  impl_ = std::make_unique<Impl>(std::move(config));
}

EndpointModel::~EndpointModel() = default;

std::string EndpointModel::render_request(const Population& pop,
                                          std::span<const std::uint32_t> context,
                                          std::size_t task) const {
  const std::string template_id = impl_->config.prompt_template.empty()
                                      ? default_template(pop.scheme())
                                      : impl_->config.prompt_template;
  std::ostringstream prompt;
  for (std::uint32_t d : context) {
    const auto& demo = pop.demo(d);
    prompt << pop.task_id(demo.task) << "\n" << render_answer(pop.demo_response(d)) << "\n";
  }
  prompt << instruction_for(template_id) << "\n" << pop.task_id(task);

  json body;
  body["model"] = impl_->config.model;
  body["temperature"] = impl_->config.temperature;
  body["messages"] = json::array({json{{"role", "user"}, {"content", prompt.str()}}});
  return body.dump();
}

ResponsePayload EndpointModel::parse_reply(const std::string& body, Scheme scheme) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("endpoint reply is not JSON: ") + e.what());
  }
  std::string content;
  if (doc.contains("content") && doc["content"].is_string()) {
    content = doc["content"].get<std::string>();
  } else if (doc.contains("choices") && doc["choices"].is_array() && !doc["choices"].empty() &&
             doc["choices"][0].contains("message") &&
             doc["choices"][0]["message"].contains("content")) {
    content = doc["choices"][0]["message"]["content"].get<std::string>();
  } else {
    throw std::runtime_error("endpoint reply has no content field");
  }

  // strip whitespace
  const auto begin = content.find_first_not_of(" \t\r\n");
  const auto end = content.find_last_not_of(" \t\r\n");
  content = begin == std::string::npos ? "" : content.substr(begin, end - begin + 1);

  switch (scheme) {
    case Scheme::binary: {
      if (content == "0") return BinaryAnswer{0};
      if (content == "1") return BinaryAnswer{1};
      throw std::runtime_error("endpoint reply '" + content + "' is not a 0/1 answer");
    }
    case Scheme::ordinal: {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(content, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != content.size() || !std::isfinite(v) || v < -1.0 || v > 1.0) {
        throw std::runtime_error("endpoint reply '" + content + "' is not a number in [-1, 1]");
      }
      return OrdinalAnswer{v};
    }
    case Scheme::continuous: {
      json arr;
      try {
        arr = json::parse(content);
      } catch (const json::parse_error&) {
        throw std::runtime_error("endpoint reply is not a JSON array");
      }
      if (!arr.is_array() || arr.empty()) {
        throw std::runtime_error("endpoint reply is not a nonempty JSON array");
      }
      Eigen::VectorXd v(arr.size());
      for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) throw std::runtime_error("endpoint reply array holds non-numbers");
        v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
      }
      return ContinuousAnswer{std::move(v)};
    }
  }
  throw std::logic_error("unreachable");
}

ResponsePayload EndpointModel::respond(const Population& pop,
                                       std::span<const std::uint32_t> context, std::size_t task,
                                       std::uint64_t /*seed*/) const {
  const std::string request = render_request(pop, context, task);

  impl_->in_flight.acquire();
  struct Release {
    std::counting_semaphore<256>& sem;
    ~Release() { sem.release(); }
  } release{impl_->in_flight};

  std::string last_error;
  for (int attempt = 0; attempt <= impl_->config.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100uLL << (attempt - 1)));
    }
    httplib::Client client(impl_->config.base_url);
    client.set_connection_timeout(std::chrono::duration<double>(impl_->config.timeout_sec));
    client.set_read_timeout(std::chrono::duration<double>(impl_->config.timeout_sec));

    auto res = client.Post(impl_->config.path, request, "application/json");
    if (!res) {
      last_error = "transport error (" + httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status >= 500) {
      last_error = "server error (status " + std::to_string(res->status) + ")";
      continue;
    }
    if (res->status != 200) {
      throw std::runtime_error("endpoint returned status " + std::to_string(res->status) +
                               " for task '" + pop.task_id(task) + "'");
    }
    return parse_reply(res->body, pop.scheme());
  }
  throw std::runtime_error("endpoint unreachable after " +
                           std::to_string(impl_->config.retries + 1) + " attempts: " + last_error);
}

}  // namespace repsel

#endif  // REPSEL_WITH_ENDPOINT
