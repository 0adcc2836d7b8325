#include "inkpipe/codec.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "inkpipe/error.hpp"

namespace inkpipe {

std::optional<int> class_level(std::string_view label) {
  for (const auto& c : kSegClasses) {
    if (c.name == label) return c.level;
  }
  return std::nullopt;
}

std::vector<std::string> classes_of_level(int level) {
  std::vector<std::string> out;
  for (const auto& c : kSegClasses) {
    if (c.level == level) out.emplace_back(c.name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

GridBox quantize_box(const BBox& box, const CanvasSpec& canvas, const CodecOptions& options) {
  auto q = [&](double v, double extent) {
    const double scaled = std::round(v / extent * options.grid_max);
    return static_cast<int>(std::clamp(scaled, 0.0, static_cast<double>(options.grid_max)));
  };
  return {q(box.x_min, canvas.w), q(box.y_min, canvas.h), q(box.x_max, canvas.w), q(box.y_max, canvas.h)};
}

// ---- prompts ---------------------------------------------------------------

Placement placement_of(const BBox& box, const CanvasSpec& canvas) {
  if (!(canvas.w > 0.0) || !(canvas.h > 0.0)) throw ValidationError("canvas dimensions must be positive");
  auto check = [](const char* name, double v, double limit) {
    if (!(v >= 0.0 && v <= limit)) {
      std::ostringstream msg;
      msg << "placement coordinate " << name << "=" << v << " lies outside [0, " << limit << "]";
      throw ValidationError(msg.str());
    }
  };
  check("x_min", box.x_min, canvas.w);
  check("y_min", box.y_min, canvas.h);
  check("x_max", box.x_max, canvas.w);
  check("y_max", box.y_max, canvas.h);
  return {box.x_min / canvas.w, box.y_min / canvas.h, box.x_max / canvas.w, box.y_max / canvas.h};
}

namespace {

// Two-decimal rendering with round-half-up. The epsilon absorbs binary
// representation error so that e.g. 0.025 and 0.145 round up.
void append_fraction(std::string& out, double v) {
  if (!std::isfinite(v)) v = 0.0;
  v = std::clamp(v, 0.0, 1.0);
  const long hundredths = std::lround(std::floor(v * 100.0 + 0.5 + 1e-9));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%ld.%02ld", hundredths / 100, hundredths % 100);
  out += buf;
}

}  // namespace

std::string format_placement(const Placement& p) {
  std::string out;
  append_fraction(out, p.x_min);
  out += ',';
  append_fraction(out, p.y_min);
  out += ',';
  append_fraction(out, p.x_max);
  out += ',';
  append_fraction(out, p.y_max);
  return out;
}

std::string placement_string(const BBox& box, const CanvasSpec& canvas) {
  return format_placement(placement_of(box, canvas));
}

std::string build_recognition_prompt(const RecognitionPrompt& p) {
  std::string out = p.question;
  out += " Language ";
  out += p.language && !p.language->empty() ? *p.language : "-";
  out += " Precontext ";
  out += p.precontext && !p.precontext->empty() ? *p.precontext : "-";
  if (p.placement) {
    out += " Placement ";
    out += format_placement(*p.placement);
  }
  return out;
}

RecognitionPrompt math_prompt(std::optional<Placement> placement) {
  RecognitionPrompt p;
  p.question = std::string(kMathQuestion);
  p.language = "LaTeX";
  p.placement = placement;
  return p;
}

std::string build_classification_prompt(SketchKind kind) {
  switch (kind) {
    case SketchKind::kSketch:
      return "What is drawn in this sketch?";
    case SketchKind::kScript:
      return "What script is this text written in?";
  }
  return {};
}

std::string build_seg_prompt(const SegPrompt& p) {
  if (p.classes.empty()) throw ValidationError("segmentation prompt needs at least one class");
  if (p.mode == SegMode::kOne && p.classes.size() != 1) {
    throw ValidationError("single-class segmentation prompt lists " + std::to_string(p.classes.size()) +
                          " classes");
  }
  std::string out = "Where are the level " + std::to_string(p.level) + " objects located? Detect multiple ";
  for (std::size_t i = 0; i < p.classes.size(); ++i) {
    const auto level = class_level(p.classes[i]);
    if (!level) throw ValidationError("unknown segmentation class '" + p.classes[i] + "'");
    if (*level != p.level) {
      throw ValidationError("class '" + p.classes[i] + "' is level " + std::to_string(*level) + ", not level " +
                            std::to_string(p.level));
    }
    if (i > 0) out += ", ";
    out += p.classes[i];
  }
  return out;
}

// ---- detection targets -----------------------------------------------------

namespace {

std::array<int, 4> to_wire(const GridBox& b, AxisOrder order) {
  if (order == AxisOrder::kYX) return {b.y_min, b.x_min, b.y_max, b.x_max};
  return {b.x_min, b.y_min, b.x_max, b.y_max};
}

GridBox from_wire(const std::array<int, 4>& v, AxisOrder order) {
  GridBox b = order == AxisOrder::kYX ? GridBox{v[1], v[0], v[3], v[2]} : GridBox{v[0], v[1], v[2], v[3]};
  if (b.x_min > b.x_max) std::swap(b.x_min, b.x_max);
  if (b.y_min > b.y_max) std::swap(b.y_min, b.y_max);
  return b;
}

bool is_integer_token(std::string_view tok) {
  return !tok.empty() && std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

std::string encode_seg_target(std::span<const SegObject> objects, std::span<const std::string> class_order,
                              const CodecOptions& options) {
  for (const auto& obj : objects) {
    const auto level = class_level(obj.label);
    if (!level) throw ValidationError("unknown segmentation class '" + obj.label + "'");
    if (*level != obj.level) {
      throw ValidationError("object '" + obj.label + "' carries level " + std::to_string(obj.level) +
                            ", expected " + std::to_string(*level));
    }
    if (std::find(class_order.begin(), class_order.end(), obj.label) == class_order.end()) {
      throw ValidationError("class '" + obj.label + "' is missing from the class order");
    }
    for (int v : to_wire(obj.box, options.order)) {
      if (v < 0 || v > options.grid_max) {
        throw ValidationError("coordinate " + std::to_string(v) + " of '" + obj.label + "' outside [0, " +
                              std::to_string(options.grid_max) + "]");
      }
    }
  }

  std::string out;
  std::vector<std::string_view> seen;
  for (const auto& cls : class_order) {
    if (std::find(seen.begin(), seen.end(), cls) != seen.end()) continue;
    seen.push_back(cls);
    for (const auto& obj : objects) {
      if (obj.label != cls) continue;
      for (int v : to_wire(obj.box, options.order)) {
        if (!out.empty()) out += ' ';
        out += std::to_string(v);
      }
      out += ' ';
      out += obj.label;
    }
  }
  return out;
}

std::string encode_seg_target(std::span<const SegObject> objects, const CodecOptions& options) {
  std::vector<std::string> order;
  for (const auto& obj : objects) {
    if (std::find(order.begin(), order.end(), obj.label) == order.end()) order.push_back(obj.label);
  }
  std::sort(order.begin(), order.end());
  return encode_seg_target(objects, order, options);
}

DecodeResult decode_seg_target(std::string_view text, std::optional<int> level, const CodecOptions& options) {
  DecodeResult result;
  std::vector<std::string_view> pending;
  std::size_t group_start = 0;
  std::size_t token_index = 0;

  auto diag = [&](std::string msg) {
    result.diagnostics.push_back("token " + std::to_string(group_start) + ": " + std::move(msg));
  };

  std::size_t pos = 0;
  while (true) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size()) break;
    std::size_t end = pos;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
    const std::string_view tok = text.substr(pos, end - pos);
    pos = end;

    if (pending.empty()) group_start = token_index;
    ++token_index;
    if (is_integer_token(tok)) {
      pending.push_back(tok);
      continue;
    }

    const std::string word(tok);
    if (pending.size() != 4) {
      if (pending.empty()) {
        diag("unexpected token '" + word + "'");
      } else {
        diag("malformed group: expected 4 integers before '" + word + "', found " +
             std::to_string(pending.size()));
      }
      pending.clear();
      continue;
    }

    std::array<int, 4> coords{};
    bool in_range = true;
    for (std::size_t i = 0; i < 4; ++i) {
      const auto* first = pending[i].data();
      const auto* last = first + pending[i].size();
      const auto [ptr, ec] = std::from_chars(first, last, coords[i]);
      if (ec != std::errc() || ptr != last || coords[i] > options.grid_max) in_range = false;
    }
    pending.clear();
    if (!in_range) {
      diag("coordinate out of range [0, " + std::to_string(options.grid_max) + "] in group ending '" + word + "'");
      continue;
    }
    const auto cls_level = class_level(word);
    if (!cls_level) {
      diag("unknown class '" + word + "'");
      continue;
    }
    if (level && *cls_level != *level) {
      diag("class '" + word + "' is level " + std::to_string(*cls_level) + ", expected level " +
           std::to_string(*level));
      continue;
    }
    result.objects.push_back({word, *cls_level, from_wire(coords, options.order)});
  }
  if (!pending.empty()) {
    diag("trailing group of " + std::to_string(pending.size()) + " integers without a class name");
  }
  return result;
}

std::vector<std::string> appearance_order(std::span<const SegObject> objects) {
  std::vector<std::string> order;
  for (const auto& obj : objects) {
    if (std::find(order.begin(), order.end(), obj.label) == order.end()) order.push_back(obj.label);
  }
  return order;
}

}  // namespace inkpipe
