#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "inkpipe/ink.hpp"

namespace inkpipe {

// Segmentation vocabulary. Level 2 holds the broadest units, level 0 the most
// granular ones.
struct SegClass {
  std::string_view name;
  int level;
};

inline constexpr std::array<SegClass, 11> kSegClasses{{
    {"textblock", 2},
    {"diagram", 2},
    {"list", 2},
    {"drawing", 2},
    {"table", 2},
    {"textline", 1},
    {"enclosure", 1},
    {"word", 0},
    {"arrow", 0},
    {"oval", 0},
    {"box", 0},
}};

// Level of a vocabulary class, nullopt for unknown names.
std::optional<int> class_level(std::string_view label);

// Vocabulary classes of one level in alphabetical order.
std::vector<std::string> classes_of_level(int level);

// Box on the integer target grid, corners inclusive.
struct GridBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  friend bool operator==(const GridBox&, const GridBox&) = default;
};

struct SegObject {
  std::string label;
  int level = 0;
  GridBox box;

  friend bool operator==(const SegObject&, const SegObject&) = default;
};

enum class AxisOrder { kYX, kXY };

struct CodecOptions {
  // kYX writes "y_min x_min y_max x_max".
  AxisOrder order = AxisOrder::kYX;
  int grid_max = 1023;
};

// Maps a box in pixel space of a `canvas`-sized image onto the target grid.
GridBox quantize_box(const BBox& box, const CanvasSpec& canvas, const CodecOptions& options = {});

// ---- prompts ---------------------------------------------------------------

// Ink bounding box as fractions of the writing canvas.
struct Placement {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
};

struct RecognitionPrompt {
  std::string question = "What is written in the image?";
  std::optional<std::string> language;
  std::optional<std::string> precontext;
  std::optional<Placement> placement;
};

enum class SegMode { kOne, kMany };

struct SegPrompt {
  int level = 1;
  std::vector<std::string> classes;
  SegMode mode = SegMode::kMany;
};

enum class SketchKind { kSketch, kScript };

inline constexpr std::string_view kTextQuestion = "What is written in the image?";
inline constexpr std::string_view kMathQuestion = "What is written in the image in LaTeX?";

// Throws ValidationError naming the coordinate that falls outside the canvas.
Placement placement_of(const BBox& box, const CanvasSpec& canvas);

// "x0,y0,x1,y1", two decimals each, rounded half up. Values are clamped to
// [0, 1].
std::string format_placement(const Placement& p);

std::string placement_string(const BBox& box, const CanvasSpec& canvas);

// "Question Language L Precontext P[ Placement X]"; an absent language or
// precontext is written as "-", an absent placement drops the clause.
std::string build_recognition_prompt(const RecognitionPrompt& p);

// Math variant: LaTeX question and language, empty precontext.
RecognitionPrompt math_prompt(std::optional<Placement> placement = std::nullopt);

std::string build_classification_prompt(SketchKind kind);

// Throws ValidationError when a class does not belong to the level, or when a
// kOne prompt does not name exactly one class.
std::string build_seg_prompt(const SegPrompt& p);

// ---- detection targets -----------------------------------------------------

// Groups objects by class in `class_order`, keeping input order inside a
// class. Throws ValidationError for a label missing from `class_order` or a
// coordinate outside [0, grid_max].
std::string encode_seg_target(std::span<const SegObject> objects, std::span<const std::string> class_order,
                              const CodecOptions& options = {});

// Overload that orders classes alphabetically.
std::string encode_seg_target(std::span<const SegObject> objects, const CodecOptions& options = {});

struct DecodeResult {
  std::vector<SegObject> objects;
  std::vector<std::string> diagnostics;
};

// Lenient parse of model output. Each group is four integers followed by a
// class name; malformed groups, unknown classes and classes of another level
// are skipped and reported in `diagnostics`. Inverted corners are swapped.
// With no level, any vocabulary class is accepted.
DecodeResult decode_seg_target(std::string_view text, std::optional<int> level = std::nullopt,
                               const CodecOptions& options = {});

// Class names in order of first appearance, the order that re-encodes a
// decoded target to the same string.
std::vector<std::string> appearance_order(std::span<const SegObject> objects);

}  // namespace inkpipe
