#pragma once

#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "inkpipe/codec.hpp"
#include "inkpipe/ink.hpp"

namespace inkpipe {

struct EndpointConfig {
  std::string url;
  std::string token_env = "INKPIPE_API_TOKEN";
  double timeout_s = 30.0;
  int retries = 3;  // total attempts per request
  double backoff_s = 0.2;
  int concurrency = 4;
};

struct Config {
  CanvasSpec canvas{448.0, 448.0};
  double stroke_width = 0.0;  // 0 selects the canvas default
  CodecOptions codec;
  std::optional<std::filesystem::path> mixture;
  EndpointConfig endpoint;
};

// Throws ValidationError for unknown keys, listing the closest allowed key.
void reject_unknown_keys(const nlohmann::json& object, std::initializer_list<std::string_view> allowed,
                         std::string_view context);

Config config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
Config load_config(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace inkpipe
