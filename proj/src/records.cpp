#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "inkpipe/codec.hpp"
#include "inkpipe/error.hpp"
#include "inkpipe/ingest.hpp"

namespace inkpipe {

std::string_view task_name(Task task) {
  switch (task) {
    case Task::kSegmentation:
      return "segmentation";
    case Task::kRecognition:
      return "recognition";
    case Task::kMath:
      return "math";
    case Task::kClassification:
      return "classification";
  }
  return "recognition";
}

std::optional<Task> parse_task(std::string_view name) {
  for (Task t : {Task::kSegmentation, Task::kRecognition, Task::kMath, Task::kClassification}) {
    if (task_name(t) == name) return t;
  }
  return std::nullopt;
}

// ---- ink ---------------------------------------------------------------------

nlohmann::ordered_json ink_to_json(const Ink& ink) {
  auto strokes = nlohmann::ordered_json::array();
  for (const auto& stroke : ink.strokes()) {
    auto pts = nlohmann::ordered_json::array();
    for (const auto& p : stroke.points()) pts.push_back({p.x, p.y, p.t});
    strokes.push_back(std::move(pts));
  }
  return strokes;
}

Ink ink_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ValidationError("ink must be an array of strokes");
  std::vector<Stroke> strokes;
  for (const auto& s : j) {
    if (!s.is_array()) throw ValidationError("stroke must be an array of [x, y, t] points");
    std::vector<Point> pts;
    for (const auto& p : s) {
      if (!p.is_array() || p.size() != 3) throw ValidationError("point must be [x, y, t]");
      pts.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
    }
    strokes.emplace_back(std::move(pts));
  }
  return Ink(std::move(strokes));
}

// ---- records -------------------------------------------------------------------

void check_version(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw ValidationError("record must be a JSON object");
  if (!j.contains("v")) throw ValidationError("record has no schema version field \"v\"");
  if (!j["v"].is_number_integer() || j["v"].get<int>() != kSchemaVersion) {
    throw ValidationError("schema version mismatch: record has v=" + j["v"].dump() + ", reader supports v=" +
                          std::to_string(kSchemaVersion));
  }
}

namespace {

void copy_extra(const nlohmann::ordered_json& from, nlohmann::ordered_json& to,
                std::initializer_list<std::string_view> known) {
  for (const auto& [key, value] : from.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) to[key] = value;
  }
}

template <typename Fn>
auto with_json_errors(Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(e.what());
  }
}

}  // namespace

nlohmann::ordered_json to_json(const TaskExample& ex) {
  nlohmann::ordered_json j;
  j["v"] = kSchemaVersion;
  j["kind"] = "example";
  j["task"] = task_name(ex.task);
  j["image"] = ex.image;
  j["prompt"] = ex.prompt;
  j["target"] = ex.target;
  j["meta"] = {{"source", ex.meta.source}, {"language", ex.meta.language}, {"sample_id", ex.meta.sample_id}};
  for (const auto& [key, value] : ex.extra.items()) j[key] = value;
  return j;
}

TaskExample example_from_json(const nlohmann::ordered_json& j) {
  check_version(j);
  return with_json_errors([&] {
    TaskExample ex;
    const std::string task = j.at("task").get<std::string>();
    const auto parsed = parse_task(task);
    if (!parsed) throw ValidationError("unknown task '" + task + "'");
    ex.task = *parsed;
    ex.image = j.value("image", std::string());
    ex.prompt = j.at("prompt").get<std::string>();
    ex.target = j.value("target", std::string());
    if (j.contains("meta")) {
      const auto& m = j["meta"];
      ex.meta = {m.value("source", std::string()), m.value("language", std::string()),
                 m.value("sample_id", std::string())};
    }
    copy_extra(j, ex.extra, {"v", "kind", "task", "image", "prompt", "target", "meta"});
    return ex;
  });
}

nlohmann::ordered_json to_json(const PageAnnotation& page) {
  nlohmann::ordered_json j;
  j["v"] = kSchemaVersion;
  j["kind"] = "page";
  j["id"] = page.id;
  j["ink"] = ink_to_json(page.ink);
  auto objects = nlohmann::ordered_json::array();
  for (const auto& o : page.objects) {
    nlohmann::ordered_json oj;
    oj["label"] = o.label;
    oj["bbox"] = {o.box.x_min, o.box.y_min, o.box.x_max, o.box.y_max};
    if (o.text) oj["text"] = *o.text;
    objects.push_back(std::move(oj));
  }
  j["objects"] = std::move(objects);
  for (const auto& [key, value] : page.extra.items()) j[key] = value;
  return j;
}

PageAnnotation page_from_json(const nlohmann::ordered_json& j) {
  check_version(j);
  return with_json_errors([&] {
    PageAnnotation page{j.at("id").get<std::string>(), ink_from_json(j.at("ink")), {},
                        nlohmann::ordered_json::object()};
    for (const auto& o : j.value("objects", nlohmann::ordered_json::array())) {
      const auto& b = o.at("bbox");
      if (!b.is_array() || b.size() != 4) throw ValidationError("bbox must be [x_min, y_min, x_max, y_max]");
      PageObject obj{o.at("label").get<std::string>(),
                     {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()},
                     std::nullopt};
      if (o.contains("text")) obj.text = o["text"].get<std::string>();
      page.objects.push_back(std::move(obj));
    }
    copy_extra(j, page.extra, {"v", "kind", "id", "ink", "objects"});
    return page;
  });
}

// ---- JSONL I/O -------------------------------------------------------------------

std::vector<nlohmann::ordered_json> read_json_lines(std::istream& in, std::string_view name) {
  std::vector<nlohmann::ordered_json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::ordered_json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(std::string(name) + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<nlohmann::ordered_json> read_json_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_json_lines(in, path.string());
}

namespace {

template <typename T, typename Parse>
std::vector<T> read_records(const std::filesystem::path& path, Parse parse) {
  std::vector<T> out;
  std::size_t index = 0;
  for (const auto& j : read_json_lines(path)) {
    ++index;
    try {
      out.push_back(parse(j));
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ": record " + std::to_string(index) + ": " + e.what());
    }
  }
  return out;
}

template <typename T>
void write_records(const std::filesystem::path& path, std::span<const T> records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& r : records) write_json_line(out, to_json(r));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::vector<TaskExample> read_examples_jsonl(const std::filesystem::path& path) {
  return read_records<TaskExample>(path, [](const auto& j) { return example_from_json(j); });
}

std::vector<PageAnnotation> read_pages_jsonl(const std::filesystem::path& path) {
  return read_records<PageAnnotation>(path, [](const auto& j) { return page_from_json(j); });
}

void write_jsonl(const std::filesystem::path& path, std::span<const TaskExample> examples) {
  write_records(path, examples);
}

void write_jsonl(const std::filesystem::path& path, std::span<const PageAnnotation> pages) {
  write_records(path, pages);
}

void write_json_line(std::ostream& out, const nlohmann::ordered_json& j) {
  out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
}

// ---- QuickDraw NDJSON ------------------------------------------------------------

NdjsonResult parse_ndjson_sketches(std::istream& in) {
  NdjsonResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string word = j.at("word").get<std::string>();
      std::vector<Stroke> strokes;
      std::size_t synth = 0;
      for (const auto& s : j.at("drawing")) {
        const auto& xs = s.at(0);
        const auto& ys = s.at(1);
        if (xs.size() != ys.size()) throw ValidationError("x and y arrays differ in length");
        const bool timed = s.size() > 2;
        if (timed && s.at(2).size() != xs.size()) throw ValidationError("t array length differs from x");
        std::vector<Point> pts;
        for (std::size_t i = 0; i < xs.size(); ++i) {
          const double t = timed ? s[2][i].get<double>() / 1000.0 : static_cast<double>(synth++) * kSynthesizedDt;
          pts.push_back({xs[i].get<double>(), ys[i].get<double>(), t});
        }
        strokes.push_back(Stroke::clamped(std::move(pts)));
      }
      result.records.push_back({Ink(std::move(strokes)), word});
    } catch (const std::exception& e) {
      result.diagnostics.push_back("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return result;
}

NdjsonResult read_ndjson_sketches(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_ndjson_sketches(in);
}

// ---- statistics ------------------------------------------------------------------

DatasetStats compute_stats(std::span<const PageAnnotation> pages) {
  DatasetStats stats;
  stats.pages = pages.size();
  std::vector<std::string> labels;
  for (const auto& c : kSegClasses) labels.emplace_back(c.name);
  std::set<std::string> others;
  for (const auto& page : pages) {
    for (const auto& o : page.objects) {
      if (!class_level(o.label)) others.insert(o.label);
    }
  }
  labels.insert(labels.end(), others.begin(), others.end());

  for (const auto& label : labels) {
    ClassStats cs;
    cs.label = label;
    cs.level = class_level(label);
    for (const auto& page : pages) {
      const auto n = static_cast<std::size_t>(std::count_if(page.objects.begin(), page.objects.end(),
                                                            [&](const PageObject& o) { return o.label == label; }));
      cs.instances += n;
      if (n > 0) ++cs.pages_present;
    }
    if (!pages.empty()) {
      const double n_pages = static_cast<double>(pages.size());
      cs.percent_present = 100.0 * static_cast<double>(cs.pages_present) / n_pages;
      cs.avg_count = static_cast<double>(cs.instances) / n_pages;
    }
    stats.classes.push_back(std::move(cs));
  }
  return stats;
}

std::string format_stats_table(const DatasetStats& stats) {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-5s  %-10s  %9s  %7s\n", "level", "class", "% present", "avg #");
  out << buf;
  for (const auto& c : stats.classes) {
    const std::string level = c.level ? std::to_string(*c.level) : "-";
    std::snprintf(buf, sizeof(buf), "%-5s  %-10s  %9.2f  %7.2f\n", level.c_str(), c.label.c_str(),
                  c.percent_present, c.avg_count);
    out << buf;
  }
  out << "pages: " << stats.pages << '\n';
  return out.str();
}

}  // namespace inkpipe
