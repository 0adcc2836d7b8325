#pragma once

#include <optional>
#include <string>
#include <vector>

#include "inkpipe/codec.hpp"
#include "inkpipe/example.hpp"
#include "inkpipe/ingest.hpp"
#include "inkpipe/raster.hpp"

namespace inkpipe {

struct SegTaskOptions {
  CanvasSpec canvas{448.0, 448.0};
  double stroke_width = 0.0;
  CodecOptions codec;
  std::vector<int> levels{2, 1, 0};
  SegMode mode = SegMode::kMany;
  // Restricts and orders the classes of a prompt; alphabetical otherwise.
  std::optional<std::vector<std::string>> classes;
  bool keep_empty = false;
};

// Page objects projected through the same fit render() applies and quantized
// to the target grid. Labels outside the vocabulary are skipped and reported.
std::vector<SegObject> page_objects_on_grid(const PageAnnotation& page, const SegTaskOptions& options,
                                            std::vector<std::string>* diagnostics = nullptr);

// Segmentation examples of one page: per level one prompt listing every class
// (kMany) or one prompt per class (kOne). Examples with an empty target are
// dropped unless keep_empty is set. Sample ids are "<page>/L<level>[/<class>]".
std::vector<TaskExample> seg_examples(const PageAnnotation& page, const SegTaskOptions& options,
                                      const std::string& image_path, std::vector<std::string>* diagnostics = nullptr);

struct RecognitionInput {
  std::optional<std::string> language;
  std::optional<std::string> precontext;
  // Writing area the ink coordinates live in; adds the Placement clause.
  std::optional<CanvasSpec> writing_area;
  bool math = false;
};

std::string recognition_prompt_for(const Ink& ink, const RecognitionInput& input);

}  // namespace inkpipe
