#include "inkpipe/tasks.hpp"

#include <algorithm>
#include <cmath>

#include "inkpipe/error.hpp"

namespace inkpipe {

std::vector<SegObject> page_objects_on_grid(const PageAnnotation& page, const SegTaskOptions& options,
                                            std::vector<std::string>* diagnostics) {
  const Similarity fit = render_transform(page.ink, options.canvas, options.stroke_width);
  const CanvasSpec px{std::round(options.canvas.w), std::round(options.canvas.h)};
  std::vector<SegObject> out;
  for (const auto& obj : page.objects) {
    const auto level = class_level(obj.label);
    if (!level) {
      if (diagnostics) diagnostics->push_back("page " + page.id + ": skipping unknown class '" + obj.label + "'");
      continue;
    }
    out.push_back({obj.label, *level, quantize_box(fit.apply(obj.box), px, options.codec)});
  }
  return out;
}

std::vector<TaskExample> seg_examples(const PageAnnotation& page, const SegTaskOptions& options,
                                      const std::string& image_path, std::vector<std::string>* diagnostics) {
  const std::vector<SegObject> objects = page_objects_on_grid(page, options, diagnostics);
  std::vector<TaskExample> out;

  auto emit = [&](int level, const std::vector<std::string>& classes, const std::string& suffix) {
    std::vector<SegObject> selected;
    for (const auto& o : objects) {
      if (std::find(classes.begin(), classes.end(), o.label) != classes.end()) selected.push_back(o);
    }
    if (selected.empty() && !options.keep_empty) return;
    TaskExample ex;
    ex.task = Task::kSegmentation;
    ex.image = image_path;
    ex.prompt = build_seg_prompt({level, classes, options.mode});
    ex.target = encode_seg_target(selected, classes, options.codec);
    ex.meta = {"pages", "", page.id + "/L" + std::to_string(level) + suffix};
    ex.extra["level"] = level;
    ex.extra["classes"] = classes;
    out.push_back(std::move(ex));
  };

  for (int level : options.levels) {
    std::vector<std::string> classes = classes_of_level(level);
    if (classes.empty()) throw ValidationError("no segmentation classes at level " + std::to_string(level));
    if (options.classes) {
      std::vector<std::string> chosen;
      for (const auto& c : *options.classes) {
        if (class_level(c) == level) chosen.push_back(c);
      }
      if (chosen.empty()) continue;
      classes = std::move(chosen);
    }
    if (options.mode == SegMode::kMany) {
      emit(level, classes, "");
    } else {
      for (const auto& c : classes) emit(level, {c}, "/" + c);
    }
  }
  return out;
}

std::string recognition_prompt_for(const Ink& ink, const RecognitionInput& input) {
  RecognitionPrompt p = input.math ? math_prompt() : RecognitionPrompt{};
  if (!input.math) p.language = input.language;
  p.precontext = input.precontext;
  if (input.writing_area) p.placement = placement_of(bounding_box(ink), *input.writing_area);
  return build_recognition_prompt(p);
}

}  // namespace inkpipe
