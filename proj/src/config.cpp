#include "inkpipe/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "inkpipe/error.hpp"
#include "inkpipe/metrics.hpp"

namespace inkpipe {

void reject_unknown_keys(const nlohmann::json& object, std::initializer_list<std::string_view> allowed,
                         std::string_view context) {
  for (const auto& [key, _] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
    std::string_view best;
    std::size_t best_d = std::numeric_limits<std::size_t>::max();
    for (auto candidate : allowed) {
      const std::size_t d = edit_distance(key, candidate);
      if (d < best_d) {
        best_d = d;
        best = candidate;
      }
    }
    std::string msg = std::string(context) + ": unknown key '" + key + "'";
    if (!best.empty() && best_d <= std::max<std::size_t>(2, key.size() / 2)) {
      msg += " (did you mean '" + std::string(best) + "'?)";
    }
    throw ValidationError(msg);
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

Config config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  reject_unknown_keys(j, {"canvas", "stroke_width", "codec", "mixture", "endpoint"}, "config");
  Config cfg;
  try {
    if (j.contains("canvas")) {
      const auto& c = j["canvas"];
      if (c.is_number()) {
        cfg.canvas = {c.get<double>(), c.get<double>()};
      } else {
        reject_unknown_keys(c, {"w", "h"}, "config.canvas");
        cfg.canvas = {c.at("w").get<double>(), c.at("h").get<double>()};
      }
      if (!(cfg.canvas.w > 0.0) || !(cfg.canvas.h > 0.0)) throw ValidationError("config.canvas must be positive");
    }
    cfg.stroke_width = j.value("stroke_width", 0.0);
    if (j.contains("codec")) {
      const auto& c = j["codec"];
      reject_unknown_keys(c, {"coord_order", "grid_max"}, "config.codec");
      const std::string order = c.value("coord_order", std::string("yx"));
      if (order == "yx") {
        cfg.codec.order = AxisOrder::kYX;
      } else if (order == "xy") {
        cfg.codec.order = AxisOrder::kXY;
      } else {
        throw ValidationError("config.codec.coord_order must be 'yx' or 'xy', got '" + order + "'");
      }
      cfg.codec.grid_max = c.value("grid_max", 1023);
      if (cfg.codec.grid_max < 1) throw ValidationError("config.codec.grid_max must be >= 1");
    }
    if (j.contains("mixture")) {
      std::filesystem::path p = j["mixture"].get<std::string>();
      cfg.mixture = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    if (j.contains("endpoint")) {
      const auto& e = j["endpoint"];
      reject_unknown_keys(e, {"url", "token_env", "timeout_s", "retries", "backoff_s", "concurrency"},
                          "config.endpoint");
      cfg.endpoint.url = e.value("url", cfg.endpoint.url);
      cfg.endpoint.token_env = e.value("token_env", cfg.endpoint.token_env);
      cfg.endpoint.timeout_s = e.value("timeout_s", cfg.endpoint.timeout_s);
      cfg.endpoint.retries = e.value("retries", cfg.endpoint.retries);
      cfg.endpoint.backoff_s = e.value("backoff_s", cfg.endpoint.backoff_s);
      cfg.endpoint.concurrency = e.value("concurrency", cfg.endpoint.concurrency);
      if (cfg.endpoint.retries < 1) throw ValidationError("config.endpoint.retries must be >= 1");
      if (cfg.endpoint.concurrency < 1) throw ValidationError("config.endpoint.concurrency must be >= 1");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path), path.parent_path());
}

}  // namespace inkpipe
