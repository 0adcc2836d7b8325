#include "inkpipe/client.hpp"

#include <sodium.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "inkpipe/error.hpp"
#include "inkpipe/raster.hpp"

namespace inkpipe {

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  const std::size_t len = sodium_base64_encoded_len(bytes.size(), sodium_base64_VARIANT_ORIGINAL);
  std::string out(len, '\0');
  sodium_bin2base64(out.data(), out.size(), bytes.data(), bytes.size(), sodium_base64_VARIANT_ORIGINAL);
  out.resize(len - 1);  // drop the terminator
  return out;
}

std::string request_body(const InferenceRequest& req) {
  nlohmann::ordered_json j;
  j["id"] = req.id;
  j["prompt"] = req.prompt;
  j["image_base64"] = base64_encode(req.image_png);
  return j.dump();
}

Transport http_transport(const EndpointConfig& endpoint) {
  const auto scheme = endpoint.url.find("://");
  if (scheme == std::string::npos) throw ValidationError("endpoint url needs a scheme: '" + endpoint.url + "'");
  const auto slash = endpoint.url.find('/', scheme + 3);
  const std::string base = endpoint.url.substr(0, slash);
  const std::string path = slash == std::string::npos ? "/" : endpoint.url.substr(slash);
  std::string token;
  if (const char* t = std::getenv(endpoint.token_env.c_str())) token = t;
  const double timeout = endpoint.timeout_s;

  return [base, path, token, timeout](const std::string& body) {
    httplib::Client cli(base);
    const auto secs = static_cast<time_t>(timeout);
    const auto usecs = static_cast<time_t>((timeout - static_cast<double>(secs)) * 1e6);
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
    auto res = cli.Post(path, headers, body, "application/json");
    if (!res) return TransportReply{0, {}, httplib::to_string(res.error())};
    return TransportReply{res->status, res->body, {}};
  };
}

namespace {

bool transient(int status) { return status == 0 || status == 429 || status >= 500; }

std::optional<std::string> image_problem(const InferenceRequest& req, int size) {
  if (size <= 0) return std::nullopt;
  try {
    const Rgb8Image img = decode_png(req.image_png);
    if (img.width != size || img.height != size) {
      return "image is " + std::to_string(img.width) + "x" + std::to_string(img.height) + ", model expects " +
             std::to_string(size) + "x" + std::to_string(size);
    }
  } catch (const std::exception& e) {
    return e.what();
  }
  return std::nullopt;
}

InferenceResponse run_one(const InferenceRequest& req, const Transport& transport, const BatchOptions& options) {
  InferenceResponse resp;
  resp.id = req.id;
  if (auto problem = image_problem(req, options.image_size)) {
    resp.error = *problem;
    return resp;
  }
  const std::string body = request_body(req);
  const auto start = std::chrono::steady_clock::now();
  std::string last_error;
  for (int attempt = 1; attempt <= std::max(1, options.attempts); ++attempt) {
    resp.attempts = attempt;
    TransportReply reply;
    try {
      reply = transport(body);
    } catch (const std::exception& e) {
      reply = {0, {}, e.what()};
    }
    if (reply.status == 200) {
      try {
        const auto j = nlohmann::json::parse(reply.body);
        const std::string id = j.at("id").get<std::string>();
        if (id != req.id) {
          last_error = "response id '" + id + "' does not match request";
        } else {
          resp.answer = j.at("answer").get<std::string>();
        }
      } catch (const std::exception& e) {
        last_error = std::string("malformed response: ") + e.what();
      }
      break;
    }
    last_error = reply.status == 0 ? "transport error: " + reply.error
                                   : "HTTP " + std::to_string(reply.status) + ": " + reply.body;
    if (!transient(reply.status) || attempt == options.attempts) break;
    std::this_thread::sleep_for(std::chrono::duration<double>(options.backoff_s * std::pow(2.0, attempt - 1)));
  }
  resp.latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!resp.answer) resp.error = last_error;
  return resp;
}

}  // namespace

std::vector<InferenceResponse> infer_batch(std::span<const InferenceRequest> requests, const Transport& transport,
                                           const BatchOptions& options) {
  std::vector<InferenceResponse> out(requests.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < requests.size(); i = next++) out[i] = run_one(requests[i], transport, options);
  };
  const std::size_t n_workers = std::min<std::size_t>(std::max(1, options.concurrency), requests.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const InferenceResponse& a, const InferenceResponse& b) { return a.id < b.id; });
  return out;
}

std::vector<InferenceResponse> infer_batch(std::span<const InferenceRequest> requests,
                                           const EndpointConfig& endpoint, int image_size) {
  BatchOptions options;
  options.concurrency = endpoint.concurrency;
  options.attempts = endpoint.retries;
  options.backoff_s = endpoint.backoff_s;
  options.image_size = image_size;
  return infer_batch(requests, http_transport(endpoint), options);
}

}  // namespace inkpipe
