#include "commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include "inkpipe/client.hpp"
#include "inkpipe/codec.hpp"
#include "inkpipe/config.hpp"
#include "inkpipe/error.hpp"
#include "inkpipe/ingest.hpp"
#include "inkpipe/metrics.hpp"
#include "inkpipe/mixture.hpp"
#include "inkpipe/raster.hpp"
#include "inkpipe/tasks.hpp"

namespace inkpipe::cli {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---- stream plumbing -----------------------------------------------------------

class Input {
 public:
  Input(const std::string& path, std::istream& stdin_stream) : name_(path) {
    if (path == "-") {
      stream_ = &stdin_stream;
      name_ = "<stdin>";
      return;
    }
    file_ = std::make_unique<std::ifstream>(path);
    if (!*file_) throw IoError("cannot open " + path);
    stream_ = file_.get();
  }
  std::istream& get() { return *stream_; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  std::unique_ptr<std::ifstream> file_;
  std::istream* stream_ = nullptr;
};

class Output {
 public:
  Output(const std::string& path, std::ostream& stdout_stream) : path_(path) {
    if (path == "-") {
      stream_ = &stdout_stream;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path, std::ios::trunc);
    if (!*file_) throw IoError("cannot open " + path + " for writing");
    stream_ = file_.get();
  }
  std::ostream& get() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw IoError("failed writing " + path_);
  }

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

std::string lower_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

std::string record_id(const Json& j, std::size_t fallback) {
  if (j.contains("id") && j["id"].is_string()) return j["id"].get<std::string>();
  if (j.contains("meta") && j["meta"].contains("sample_id")) return j["meta"]["sample_id"].get<std::string>();
  return std::to_string(fallback);
}

std::optional<std::string> record_text(const Json& j) {
  for (const char* key : {"answer", "target", "text", "label"}) {
    if (j.contains(key) && j[key].is_string()) return j[key].get<std::string>();
  }
  return std::nullopt;
}

std::vector<int> parse_levels(const std::vector<int>& levels) {
  for (int l : levels) {
    if (l < 0 || l > 2) throw ValidationError("level must be 0, 1 or 2, got " + std::to_string(l));
  }
  return levels;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, item.find_last_not_of(' ') - b + 1));
  }
  return out;
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

// ---- shared options ----------------------------------------------------------------

struct CommonFlags {
  std::string config_path;
  double canvas = 0.0;
  double stroke_width = 0.0;
  std::string coord_order;
  int grid_max = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file; flags override it");
  cmd->add_option("--canvas", f.canvas, "Square canvas side in pixels");
  cmd->add_option("--stroke-width", f.stroke_width, "Stroke width in pixels");
  cmd->add_option("--coord-order", f.coord_order, "Target coordinate order")->check(CLI::IsMember({"yx", "xy"}));
  cmd->add_option("--grid-max", f.grid_max, "Largest target grid coordinate");
}

Config resolve_config(const CommonFlags& f) {
  Config cfg = f.config_path.empty() ? Config{} : load_config(f.config_path);
  if (f.canvas > 0.0) cfg.canvas = {f.canvas, f.canvas};
  if (f.stroke_width > 0.0) cfg.stroke_width = f.stroke_width;
  if (!f.coord_order.empty()) cfg.codec.order = f.coord_order == "xy" ? AxisOrder::kXY : AxisOrder::kYX;
  if (f.grid_max > 0) cfg.codec.grid_max = f.grid_max;
  return cfg;
}

SegTaskOptions seg_options(const Config& cfg, const std::vector<int>& levels, const std::string& mode,
                           const std::string& classes, bool keep_empty) {
  SegTaskOptions o;
  o.canvas = cfg.canvas;
  o.stroke_width = cfg.stroke_width;
  o.codec = cfg.codec;
  if (!levels.empty()) o.levels = parse_levels(levels);
  o.mode = mode == "one" ? SegMode::kOne : SegMode::kMany;
  if (!classes.empty()) {
    o.classes = split_commas(classes);
    for (const auto& c : *o.classes) {
      if (!class_level(c)) throw ValidationError("unknown segmentation class '" + c + "'");
    }
  }
  o.keep_empty = keep_empty;
  return o;
}

// ---- render ------------------------------------------------------------------------

Ink load_ink(const fs::path& path, std::size_t index, std::ostream& err) {
  const std::string ext = lower_extension(path);
  if (ext == ".inkml" || ext == ".xml") {
    auto docs = read_inkml(path);
    for (const auto& d : docs.front().diagnostics) err << d << '\n';
    if (index >= docs.size()) throw ValidationError(path.string() + " has no ink #" + std::to_string(index));
    return docs[index].ink;
  }
  if (ext == ".ndjson") {
    auto result = read_ndjson_sketches(path);
    for (const auto& d : result.diagnostics) err << path.string() << ": " << d << '\n';
    if (index >= result.records.size()) {
      throw ValidationError(path.string() + " has no sketch #" + std::to_string(index));
    }
    return result.records[index].ink;
  }
  const auto lines = read_json_lines(path);
  if (index >= lines.size()) throw ValidationError(path.string() + " has no record #" + std::to_string(index));
  const Json& j = lines[index];
  check_version(j);
  if (!j.contains("ink")) throw ValidationError(path.string() + ": record has no \"ink\" field");
  return ink_from_json(j["ink"]);
}

int cmd_render(const std::string& in_path, const std::string& out_path, std::size_t index, const CommonFlags& f,
               std::ostream& err) {
  const Config cfg = resolve_config(f);
  const Ink ink = load_ink(in_path, index, err);
  RenderOptions ro;
  ro.stroke_width = cfg.stroke_width;
  export_image(render(ink, cfg.canvas, ro), out_path);
  return kExitOk;
}

// ---- encode / decode ---------------------------------------------------------------

Json objects_to_json(std::span<const SegObject> objects) {
  auto arr = Json::array();
  for (const auto& o : objects) {
    Json oj;
    oj["label"] = o.label;
    oj["level"] = o.level;
    oj["bbox"] = {o.box.x_min, o.box.y_min, o.box.x_max, o.box.y_max};
    arr.push_back(std::move(oj));
  }
  return arr;
}

std::vector<SegObject> objects_from_json(const Json& arr) {
  std::vector<SegObject> out;
  for (const auto& o : arr) {
    const std::string label = o.at("label").get<std::string>();
    const auto level = class_level(label);
    if (!level) throw ValidationError("unknown segmentation class '" + label + "'");
    const auto& b = o.at("bbox");
    if (!b.is_array() || b.size() != 4) throw ValidationError("bbox must be [x_min, y_min, x_max, y_max]");
    out.push_back({label, o.value("level", *level),
                   {b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()}});
  }
  return out;
}

struct EncodeFlags {
  std::string in = "-";
  std::string out = "-";
  std::vector<int> levels;
  std::string mode = "many";
  std::string classes;
  std::string image_dir;
  bool raw = false;
  bool keep_empty = false;
};

int cmd_encode(const EncodeFlags& ef, const CommonFlags& f, std::istream& sin, std::ostream& sout,
               std::ostream& err) {
  const Config cfg = resolve_config(f);
  const SegTaskOptions opts = seg_options(cfg, ef.levels, ef.mode, ef.classes, ef.keep_empty);
  Input input(ef.in, sin);
  const auto records = read_json_lines(input.get(), input.name());
  Output output(ef.out, sout);
  std::vector<std::string> diagnostics;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Json& j = records[i];
    const bool page = j.value("kind", std::string()) == "page" || j.contains("ink");
    if (page) {
      const PageAnnotation p = page_from_json(j);
      std::string image;
      if (!ef.image_dir.empty()) {
        const fs::path target = fs::path(ef.image_dir) / (p.id + ".png");
        RenderOptions ro;
        ro.stroke_width = cfg.stroke_width;
        export_image(render(p.ink, cfg.canvas, ro), target);
        image = target.string();
      }
      for (const auto& ex : seg_examples(p, opts, image, &diagnostics)) write_json_line(output.get(), to_json(ex));
      continue;
    }
    if (!j.contains("objects")) {
      throw ValidationError(input.name() + ": record " + std::to_string(i + 1) + " is neither a page nor objects");
    }
    const auto objects = objects_from_json(j["objects"]);
    std::vector<std::string> order;
    if (j.contains("classes")) {
      order = j["classes"].get<std::vector<std::string>>();
    } else {
      order = appearance_order(objects);
    }
    const std::string target = encode_seg_target(objects, order, cfg.codec);
    if (ef.raw) {
      output.get() << target << '\n';
    } else {
      Json o;
      o["id"] = record_id(j, i + 1);
      o["target"] = target;
      write_json_line(output.get(), o);
    }
  }
  output.finish();
  for (const auto& d : diagnostics) err << d << '\n';
  return kExitOk;
}

int cmd_decode(const std::string& in_path, const std::string& out_path, std::optional<int> level,
               const CommonFlags& f, std::istream& sin, std::ostream& sout, std::ostream& err) {
  const Config cfg = resolve_config(f);
  Input input(in_path, sin);
  Output output(out_path, sout);
  std::string line;
  std::size_t lineno = 0;
  bool any_diagnostic = false;
  while (std::getline(input.get(), line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string id = std::to_string(lineno);
    std::string text = line;
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] == '{') {
      Json j;
      try {
        j = Json::parse(line);
      } catch (const Json::parse_error& e) {
        throw ValidationError(input.name() + ":" + std::to_string(lineno) + ": " + e.what());
      }
      id = record_id(j, lineno);
      text = record_text(j).value_or("");
    }
    const DecodeResult r = decode_seg_target(text, level, cfg.codec);
    Json o;
    o["id"] = id;
    o["objects"] = objects_to_json(r.objects);
    o["diagnostics"] = r.diagnostics;
    write_json_line(output.get(), o);
    for (const auto& d : r.diagnostics) err << input.name() << ":" << lineno << ": " << d << '\n';
    any_diagnostic = any_diagnostic || !r.diagnostics.empty();
  }
  output.finish();
  return any_diagnostic ? kExitValidation : kExitOk;
}

// ---- mix ---------------------------------------------------------------------------

int cmd_mix(const std::string& spec_path, std::size_t n, const std::string& out_path, std::optional<std::uint64_t> seed,
            std::ostream& sout) {
  MixtureConfig mc = load_mixture_config(spec_path);
  if (seed) mc.spec.seed = *seed;
  const SourceMap sources = load_sources(mc);
  const auto stream = sample_stream(mc.spec, sources, n);
  Output output(out_path, sout);
  for (const auto& ex : stream) write_json_line(output.get(), to_json(ex));
  output.finish();
  return kExitOk;
}

// ---- eval --------------------------------------------------------------------------

std::map<std::string, Json> index_records(const std::vector<Json>& records, std::vector<std::string>& order,
                                          const std::string& name) {
  std::map<std::string, Json> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string id = record_id(records[i], i + 1);
    if (!out.emplace(id, records[i]).second) throw ValidationError(name + ": duplicate id '" + id + "'");
    order.push_back(id);
  }
  return out;
}

std::vector<GroundTruth> gt_boxes(const Json& j, const CodecOptions& codec, std::vector<std::string>& diags,
                                  const std::string& id) {
  std::vector<GroundTruth> out;
  if (j.contains("objects")) {
    for (const auto& o : j["objects"]) {
      const auto& b = o.at("bbox");
      out.push_back({o.at("label").get<std::string>(),
                     {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()}});
    }
    return out;
  }
  const DecodeResult r = decode_seg_target(record_text(j).value_or(""), std::nullopt, codec);
  for (const auto& d : r.diagnostics) diags.push_back("gt " + id + ": " + d);
  for (const auto& o : r.objects) {
    out.push_back({o.label, {static_cast<double>(o.box.x_min), static_cast<double>(o.box.y_min),
                             static_cast<double>(o.box.x_max), static_cast<double>(o.box.y_max)}});
  }
  return out;
}

std::vector<Detection> pred_boxes(const Json& j, const CodecOptions& codec, std::vector<std::string>& diags,
                                  const std::string& id) {
  std::vector<Detection> out;
  if (j.contains("detections")) {
    for (const auto& d : j["detections"]) {
      const auto& b = d.at("bbox");
      out.push_back({d.at("label").get<std::string>(),
                     {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()},
                     d.value("score", 1.0)});
    }
    return out;
  }
  const DecodeResult r = decode_seg_target(record_text(j).value_or(""), std::nullopt, codec);
  for (const auto& d : r.diagnostics) diags.push_back("pred " + id + ": " + d);
  for (const auto& o : r.objects) {
    out.push_back({o.label,
                   {static_cast<double>(o.box.x_min), static_cast<double>(o.box.y_min),
                    static_cast<double>(o.box.x_max), static_cast<double>(o.box.y_max)},
                   1.0});
  }
  return out;
}

int cmd_eval(const std::string& task, const std::string& pred_path, const std::string& gt_path,
             const std::string& out_path, const CommonFlags& f, std::ostream& sout, std::ostream& err) {
  const Config cfg = resolve_config(f);
  std::vector<std::string> gt_order, pred_order;
  const auto gts = index_records(read_json_lines(fs::path(gt_path)), gt_order, gt_path);
  const auto preds = index_records(read_json_lines(fs::path(pred_path)), pred_order, pred_path);
  std::vector<std::string> diags;
  for (const auto& id : pred_order) {
    if (!gts.contains(id)) diags.push_back("prediction '" + id + "' has no ground truth");
  }
  auto pred_text = [&](const std::string& id) -> std::string {
    const auto it = preds.find(id);
    if (it == preds.end()) {
      diags.push_back("missing prediction for '" + id + "'");
      return {};
    }
    if (it->second.contains("error")) diags.push_back("prediction '" + id + "' failed: " + it->second["error"].dump());
    return record_text(it->second).value_or("");
  };

  Json report;
  report["task"] = task;
  std::ostringstream text;
  if (task == "seg") {
    std::vector<ImageEval> images;
    for (const auto& id : gt_order) {
      ImageEval img{id, {}, gt_boxes(gts.at(id), cfg.codec, diags, id)};
      if (const auto it = preds.find(id); it != preds.end()) {
        img.preds = pred_boxes(it->second, cfg.codec, diags, id);
      } else {
        diags.push_back("missing prediction for '" + id + "'");
      }
      images.push_back(std::move(img));
    }
    const EvalReport r = map_report(images);
    diags.insert(diags.end(), r.diagnostics.begin(), r.diagnostics.end());
    report["mAP"] = round2(r.map);
    report["mAP@50IoU"] = round2(r.map50);
    report["gt_count"] = r.gt_count;
    report["pred_count"] = r.pred_count;
    Json classes = Json::object();
    text << "class        mAP  mAP@50IoU   #gt  #pred\n";
    for (const auto& [name, cr] : r.classes) {
      classes[name] = {{"mAP", round2(100.0 * cr.map())},
                       {"mAP@50IoU", round2(100.0 * cr.map50())},
                       {"gt_count", cr.gt_count},
                       {"pred_count", cr.pred_count}};
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%-10s %6.2f  %9.2f  %4zu  %5zu\n", name.c_str(), 100.0 * cr.map(),
                    100.0 * cr.map50(), cr.gt_count, cr.pred_count);
      text << buf;
    }
    report["classes"] = std::move(classes);
    text << "mAP " << fixed2(r.map) << "  mAP@50IoU " << fixed2(r.map50) << '\n';
  } else if (task == "rec") {
    CerAccumulator acc;
    for (const auto& id : gt_order) acc.add(pred_text(id), record_text(gts.at(id)).value_or(""));
    report["CER"] = round2(acc.percent());
    report["edit_distance"] = acc.distance;
    report["ref_length"] = acc.ref_length;
    report["samples"] = acc.samples;
    text << "CER " << fixed2(acc.percent()) << "  (" << acc.distance << "/" << acc.ref_length << ", " << acc.samples
         << " samples)\n";
  } else if (task == "cls") {
    std::vector<std::string> p, g;
    for (const auto& id : gt_order) {
      p.push_back(pred_text(id));
      g.push_back(record_text(gts.at(id)).value_or(""));
    }
    const double acc = 100.0 * classification_accuracy(p, g);
    report["accuracy"] = round2(acc);
    report["samples"] = g.size();
    text << "accuracy " << fixed2(acc) << "  (" << g.size() << " samples)\n";
  } else {
    throw ValidationError("unknown eval task '" + task + "'");
  }
  report["diagnostics"] = diags;
  for (const auto& d : diags) err << d << '\n';

  if (!out_path.empty()) {
    Output output(out_path, sout);
    output.get() << report.dump(2) << '\n';
    output.finish();
    if (out_path != "-") sout << text.str();
  } else {
    sout << text.str();
  }
  return kExitOk;
}

// ---- stats -------------------------------------------------------------------------

int cmd_stats(const std::string& in_path, std::istream& sin, std::ostream& sout) {
  Input input(in_path, sin);
  std::vector<PageAnnotation> pages;
  std::size_t i = 0;
  for (const auto& j : read_json_lines(input.get(), input.name())) {
    ++i;
    try {
      pages.push_back(page_from_json(j));
    } catch (const ValidationError& e) {
      throw ValidationError(input.name() + ": record " + std::to_string(i) + ": " + e.what());
    }
  }
  sout << format_stats_table(compute_stats(pages));
  return kExitOk;
}

// ---- infer -------------------------------------------------------------------------

struct InferFlags {
  std::string in;
  std::string out = "-";
  std::string endpoint;
  double timeout = 0.0;
  int retries = 0;
  int concurrency = 0;
  std::string token_env;
  std::vector<int> levels;
  std::string mode = "many";
  int image_size = 448;
};

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int cmd_infer(const InferFlags& ifl, const CommonFlags& f, std::istream& sin, std::ostream& sout,
              std::ostream& err) {
  Config cfg = resolve_config(f);
  if (!ifl.endpoint.empty()) cfg.endpoint.url = ifl.endpoint;
  if (ifl.timeout > 0.0) cfg.endpoint.timeout_s = ifl.timeout;
  if (ifl.retries > 0) cfg.endpoint.retries = ifl.retries;
  if (ifl.concurrency > 0) cfg.endpoint.concurrency = ifl.concurrency;
  if (!ifl.token_env.empty()) cfg.endpoint.token_env = ifl.token_env;
  if (cfg.endpoint.url.empty()) throw ValidationError("no endpoint url (use --endpoint or config endpoint.url)");
  if (f.canvas <= 0.0 && f.config_path.empty()) cfg.canvas = {double(ifl.image_size), double(ifl.image_size)};

  Input input(ifl.in, sin);
  const fs::path base = ifl.in == "-" ? fs::path() : fs::path(ifl.in).parent_path();
  const SegTaskOptions opts = seg_options(cfg, ifl.levels, ifl.mode, "", false);
  std::vector<InferenceRequest> requests;
  std::vector<std::string> diagnostics;
  for (const auto& j : read_json_lines(input.get(), input.name())) {
    const bool page = j.value("kind", std::string()) == "page" || j.contains("ink");
    if (page) {
      const PageAnnotation p = page_from_json(j);
      RenderOptions ro;
      ro.stroke_width = cfg.stroke_width;
      const auto png = encode_png(render(p.ink, cfg.canvas, ro));
      for (const auto& ex : seg_examples(p, opts, "", &diagnostics)) {
        requests.push_back({ex.meta.sample_id, ex.prompt, png});
      }
      continue;
    }
    const TaskExample ex = example_from_json(j);
    fs::path image = ex.image;
    if (image.is_relative()) image = base / image;
    requests.push_back({ex.meta.sample_id, ex.prompt, read_bytes(image)});
  }
  for (const auto& d : diagnostics) err << d << '\n';

  std::set<std::string> ids;
  for (const auto& r : requests) {
    if (!ids.insert(r.id).second) throw ValidationError("duplicate request id '" + r.id + "'");
  }

  const auto responses = infer_batch(requests, cfg.endpoint, ifl.image_size);
  std::map<std::string, const InferenceResponse*> by_id;
  for (const auto& r : responses) by_id[r.id] = &r;

  Output output(ifl.out, sout);
  std::size_t failures = 0;
  for (const auto& req : requests) {
    const InferenceResponse& r = *by_id.at(req.id);
    Json o;
    o["id"] = r.id;
    if (r.answer) {
      o["answer"] = *r.answer;
    } else {
      o["error"] = r.error.value_or("unknown error");
      err << "request " << r.id << " failed: " << o["error"].get<std::string>() << '\n';
      ++failures;
    }
    o["attempts"] = r.attempts;
    write_json_line(output.get(), o);
  }
  output.finish();
  return failures == 0 ? kExitOk : kExitIo;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Online handwriting data preparation, task encoding and evaluation", "inkpipe"};
  app.require_subcommand(1);

  CommonFlags common;

  auto* render_cmd = app.add_subcommand("render", "Render an ink file to a PNG with time/distance colors");
  std::string render_in, render_out;
  std::size_t render_index = 0;
  render_cmd->add_option("input", render_in, "Ink file (.inkml, .ndjson or JSONL page)")->required();
  render_cmd->add_option("-o,--out", render_out, "Output PNG path")->required();
  render_cmd->add_option("--index", render_index, "Which ink of the file to render");
  add_common(render_cmd, common);

  auto* encode_cmd = app.add_subcommand("encode", "Pages or decoded objects to segmentation targets");
  EncodeFlags ef;
  encode_cmd->add_option("--in", ef.in, "Input JSONL ('-' for stdin)");
  encode_cmd->add_option("--out", ef.out, "Output JSONL ('-' for stdout)");
  encode_cmd->add_option("--level", ef.levels, "Segmentation level(s) to emit");
  encode_cmd->add_option("--mode", ef.mode, "Prompt formulation")->check(CLI::IsMember({"one", "many"}));
  encode_cmd->add_option("--classes", ef.classes, "Comma-separated class order");
  encode_cmd->add_option("--image-dir", ef.image_dir, "Render page images into this directory");
  encode_cmd->add_flag("--raw", ef.raw, "Print bare target strings for object records");
  encode_cmd->add_flag("--keep-empty", ef.keep_empty, "Keep examples whose target is empty");
  add_common(encode_cmd, common);

  auto* decode_cmd = app.add_subcommand("decode", "Target strings or model answers to objects");
  std::string decode_in = "-", decode_out = "-";
  int decode_level = -1;
  decode_cmd->add_option("--in", decode_in, "Input lines: raw targets or JSON with answer/target");
  decode_cmd->add_option("--out", decode_out, "Output JSONL");
  decode_cmd->add_option("--level", decode_level, "Only accept classes of this level");
  add_common(decode_cmd, common);

  auto* mix_cmd = app.add_subcommand("mix", "Sample a training stream from a mixture spec");
  std::string mix_spec, mix_out = "-";
  std::size_t mix_n = 0;
  std::optional<std::uint64_t> mix_seed;
  mix_cmd->add_option("--spec", mix_spec, "Mixture spec JSON")->required();
  mix_cmd->add_option("--n", mix_n, "Number of examples")->required();
  mix_cmd->add_option("--out", mix_out, "Output JSONL");
  mix_cmd->add_option("--seed", mix_seed, "Override the spec seed");

  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
  std::string eval_task, eval_pred, eval_gt, eval_out;
  eval_cmd->add_option("--task", eval_task, "Metric family")->required()->check(CLI::IsMember({"seg", "rec", "cls"}));
  eval_cmd->add_option("--pred", eval_pred, "Predictions JSONL")->required();
  eval_cmd->add_option("--gt", eval_gt, "Ground truth JSONL")->required();
  eval_cmd->add_option("--out", eval_out, "Write the JSON report here");
  add_common(eval_cmd, common);

  auto* stats_cmd = app.add_subcommand("stats", "Per-class page statistics of an annotation set");
  std::string stats_in = "-";
  stats_cmd->add_option("--in,input", stats_in, "Pages JSONL");

  auto* infer_cmd = app.add_subcommand("infer", "Query an inference endpoint for every record");
  InferFlags ifl;
  infer_cmd->add_option("--in", ifl.in, "Examples or pages JSONL")->required();
  infer_cmd->add_option("--out", ifl.out, "Answers JSONL");
  infer_cmd->add_option("--endpoint", ifl.endpoint, "Endpoint URL");
  infer_cmd->add_option("--timeout", ifl.timeout, "Per-request timeout in seconds");
  infer_cmd->add_option("--retries", ifl.retries, "Attempts per request");
  infer_cmd->add_option("--concurrency", ifl.concurrency, "Requests in flight");
  infer_cmd->add_option("--token-env", ifl.token_env, "Environment variable holding the bearer token");
  infer_cmd->add_option("--level", ifl.levels, "Levels to prompt for page records");
  infer_cmd->add_option("--mode", ifl.mode, "Prompt formulation for pages")->check(CLI::IsMember({"one", "many"}));
  infer_cmd->add_option("--image-size", ifl.image_size, "Model input resolution");
  add_common(infer_cmd, common);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (render_cmd->parsed()) return cmd_render(render_in, render_out, render_index, common, err);
    if (encode_cmd->parsed()) return cmd_encode(ef, common, in, out, err);
    if (decode_cmd->parsed()) {
      return cmd_decode(decode_in, decode_out, decode_level >= 0 ? std::optional<int>(decode_level) : std::nullopt,
                        common, in, out, err);
    }
    if (mix_cmd->parsed()) return cmd_mix(mix_spec, mix_n, mix_out, mix_seed, out);
    if (eval_cmd->parsed()) return cmd_eval(eval_task, eval_pred, eval_gt, eval_out, common, out, err);
    if (stats_cmd->parsed()) return cmd_stats(stats_in, in, out);
    if (infer_cmd->parsed()) return cmd_infer(ifl, common, in, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace inkpipe::cli
