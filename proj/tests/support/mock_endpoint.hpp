#pragma once

// In-process HTTP stand-in for the inference service.

#include <functional>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>
#include <json.hpp>

namespace inkpipe::testing {

class MockEndpoint {
 public:
  // Receives the parsed request body, returns (status, body).
  using Handler = std::function<std::pair<int, std::string>(const nlohmann::json&)>;

  explicit MockEndpoint(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/infer", [this](const httplib::Request& req, httplib::Response& res) {
      auto [status, body] = handler_(nlohmann::json::parse(req.body));
      res.status = status;
      res.set_content(body, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockEndpoint() {
    server_.stop();
    thread_.join();
  }
  MockEndpoint(const MockEndpoint&) = delete;
  MockEndpoint& operator=(const MockEndpoint&) = delete;

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/infer"; }

  static std::string answer(const std::string& id, const std::string& text) {
    return nlohmann::json{{"id", id}, {"answer", text}}.dump();
  }

 private:
  Handler handler_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace inkpipe::testing
