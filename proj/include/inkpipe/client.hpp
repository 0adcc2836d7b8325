#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inkpipe/config.hpp"

namespace inkpipe {

struct InferenceRequest {
  std::string id;
  std::string prompt;
  std::vector<std::uint8_t> image_png;
};

struct InferenceResponse {
  std::string id;
  std::optional<std::string> answer;  // set xor error
  std::optional<std::string> error;
  double latency_s = 0.0;
  int attempts = 0;
};

// Result of one POST. status 0 means the request never got an HTTP answer.
struct TransportReply {
  int status = 0;
  std::string body;
  std::string error;
};

using Transport = std::function<TransportReply(const std::string& body)>;

// POSTs JSON to the configured URL; adds "Authorization: Bearer <token>" when
// the token environment variable is set. Safe to call from several threads.
Transport http_transport(const EndpointConfig& endpoint);

struct BatchOptions {
  int concurrency = 4;
  int attempts = 3;
  double backoff_s = 0.2;  // doubled after every failed attempt
  int image_size = 448;    // expected square PNG side; 0 disables the check
};

// {"id", "prompt", "image_base64"}
std::string request_body(const InferenceRequest& req);

std::string base64_encode(std::span<const std::uint8_t> bytes);

// Sends every request with at most `concurrency` in flight. Network errors,
// HTTP 429 and 5xx are retried with exponential backoff; anything else fails
// that request only. Returns one response per request, sorted by id.
std::vector<InferenceResponse> infer_batch(std::span<const InferenceRequest> requests, const Transport& transport,
                                           const BatchOptions& options = {});

std::vector<InferenceResponse> infer_batch(std::span<const InferenceRequest> requests,
                                           const EndpointConfig& endpoint, int image_size = 448);

}  // namespace inkpipe
