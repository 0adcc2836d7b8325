#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace inkpipe {

enum class Task { kSegmentation, kRecognition, kMath, kClassification };

std::string_view task_name(Task task);
std::optional<Task> parse_task(std::string_view name);

struct ExampleMeta {
  std::string source;
  std::string language;
  std::string sample_id;

  friend bool operator==(const ExampleMeta&, const ExampleMeta&) = default;
};

// One training or evaluation record. `image` is a path to the rendered PNG.
struct TaskExample {
  std::string image;
  std::string prompt;
  std::string target;
  Task task = Task::kRecognition;
  ExampleMeta meta;
  // Fields this version does not know about, kept for round-trips.
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  friend bool operator==(const TaskExample&, const TaskExample&) = default;
};

}  // namespace inkpipe
