#pragma once

#ifdef REPSEL_WITH_ENDPOINT

#include "repsel/behavior.hpp"

namespace repsel {

struct EndpointConfig {
  std::string base_url;                // e.g. http://localhost:8080
  std::string path = "/v1/chat/completions";
  std::string model = "default";
  std::string prompt_template;         // "" = pick by scheme
  double temperature = 1.0;
  double timeout_sec = 30.0;
  int retries = 2;                     // additional attempts after the first
  int max_in_flight = 4;               // concurrent requests
};

/// Chat-completion client. Sends {model, temperature, messages:[...]} with
/// the demonstrations rendered as question/answer pairs and parses a single
/// in-scheme answer back; anything out of scheme is rejected, never imputed.
class EndpointModel : public BehaviorModel {
 public:
  explicit EndpointModel(EndpointConfig config);
  ~EndpointModel() override;

  std::string name() const override { return "endpoint"; }
  bool deterministic() const override { return false; }

  ResponsePayload respond(const Population& pop, std::span<const std::uint32_t> context,
                          std::size_t task, std::uint64_t seed) const override;

  /// The exact request body respond() would send; exposed for tests.
  std::string render_request(const Population& pop, std::span<const std::uint32_t> context,
                             std::size_t task) const;

  /// Parses a raw response body into an in-scheme payload. Throws
  /// std::runtime_error on out-of-scheme replies.
  static ResponsePayload parse_reply(const std::string& body, Scheme scheme);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace repsel

#endif  // REPSEL_WITH_ENDPOINT
