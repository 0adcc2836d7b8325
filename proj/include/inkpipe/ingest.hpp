#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "inkpipe/example.hpp"
#include "inkpipe/ink.hpp"

namespace inkpipe {

// Interchange schema version written into every JSONL record as "v".
inline constexpr int kSchemaVersion = 1;

// Sampling interval used when a source carries no timestamps (100 Hz).
inline constexpr double kSynthesizedDt = 0.01;

// ---- InkML -------------------------------------------------------------------

struct InkmlTraceGroup {
  std::string label;
  std::vector<std::size_t> traces;  // indices into the ink's strokes
};

struct InkmlDocument {
  Ink ink;
  // Ink-level <annotation type="..."> values, e.g. "truth" or "label".
  std::map<std::string, std::string> annotations;
  std::vector<InkmlTraceGroup> groups;
  bool synthesized_time = false;
  std::vector<std::string> diagnostics;
};

// Traces become strokes in document order. Points are "x y [t]" separated by
// commas; the channel order follows <traceFormat> when present. Missing
// timestamps are synthesized at kSynthesizedDt. Throws ValidationError with a
// line number for malformed XML and when no usable trace exists.
std::vector<InkmlDocument> parse_inkml(std::string_view xml, std::string_view name = "<inkml>");
std::vector<InkmlDocument> read_inkml(const std::filesystem::path& path);

// ---- QuickDraw NDJSON --------------------------------------------------------

struct LabeledInk {
  Ink ink;
  std::string label;
};

struct NdjsonResult {
  std::vector<LabeledInk> records;
  std::vector<std::string> diagnostics;  // one per skipped line
};

// One {"word": ..., "drawing": [[[x...],[y...],[t_ms...]], ...]} per line.
// Timestamps are milliseconds and converted to seconds.
NdjsonResult parse_ndjson_sketches(std::istream& in);
NdjsonResult read_ndjson_sketches(const std::filesystem::path& path);

// ---- page annotations --------------------------------------------------------

// Annotated element of a page, box in the page's canvas units.
struct PageObject {
  std::string label;
  BBox box;
  std::optional<std::string> text;

  friend bool operator==(const PageObject&, const PageObject&) = default;
};

struct PageAnnotation {
  std::string id;
  Ink ink;
  std::vector<PageObject> objects;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  friend bool operator==(const PageAnnotation&, const PageAnnotation&) = default;
};

// ---- JSONL interchange ------------------------------------------------------

nlohmann::ordered_json ink_to_json(const Ink& ink);
Ink ink_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const TaskExample& ex);
nlohmann::ordered_json to_json(const PageAnnotation& page);
TaskExample example_from_json(const nlohmann::ordered_json& j);
PageAnnotation page_from_json(const nlohmann::ordered_json& j);

// Throws ValidationError naming both versions when "v" differs.
void check_version(const nlohmann::ordered_json& j);

// Non-empty lines of a JSONL stream, parsed. Errors carry the line number.
std::vector<nlohmann::ordered_json> read_json_lines(std::istream& in, std::string_view name);
std::vector<nlohmann::ordered_json> read_json_lines(const std::filesystem::path& path);

std::vector<TaskExample> read_examples_jsonl(const std::filesystem::path& path);
std::vector<PageAnnotation> read_pages_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, std::span<const TaskExample> examples);
void write_jsonl(const std::filesystem::path& path, std::span<const PageAnnotation> pages);
void write_json_line(std::ostream& out, const nlohmann::ordered_json& j);

// ---- statistics ----------------------------------------------------------------

struct ClassStats {
  std::string label;
  std::optional<int> level;  // nullopt for labels outside the vocabulary
  std::size_t pages_present = 0;
  std::size_t instances = 0;
  double percent_present = 0.0;
  double avg_count = 0.0;
};

struct DatasetStats {
  std::size_t pages = 0;
  std::vector<ClassStats> classes;  // vocabulary order, then other labels
};

DatasetStats compute_stats(std::span<const PageAnnotation> pages);

// "level class % present avg #" table, two decimals.
std::string format_stats_table(const DatasetStats& stats);

}  // namespace inkpipe
