#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "inkpipe/ink.hpp"

namespace inkpipe {

// ---- recognition -----------------------------------------------------------

// NFC-normalized code points of a UTF-8 string. Invalid sequences decode to
// U+FFFD.
std::u32string nfc_code_points(std::string_view utf8);

std::string nfc(std::string_view utf8);

// Levenshtein distance over NFC code points.
std::size_t edit_distance(std::string_view a, std::string_view b);
std::size_t edit_distance(std::u32string_view a, std::u32string_view b);

// edit_distance(pred, ref) / |ref| as a fraction. Throws ValidationError on an
// empty reference.
double cer(std::string_view pred, std::string_view ref);

// Micro-averaged corpus CER: summed distances over summed reference lengths.
struct CerAccumulator {
  std::size_t distance = 0;
  std::size_t ref_length = 0;
  std::size_t samples = 0;

  void add(std::string_view pred, std::string_view ref);
  // Percent scale; 0 when no reference characters were seen.
  double percent() const;
};

// Exact-match fraction after trimming whitespace and NFC.
double classification_accuracy(std::span<const std::string> preds, std::span<const std::string> refs);

// ---- detection -------------------------------------------------------------

struct Detection {
  std::string label;
  BBox box;
  double score = 1.0;
};

struct GroundTruth {
  std::string label;
  BBox box;
};

double iou(const BBox& a, const BBox& b);

// Single-image, single-class AP with COCO matching: predictions in descending
// score (stable on ties), each matched to the unmatched ground truth of highest
// IoU >= threshold, 101-point interpolated precision.
double average_precision(std::span<const Detection> preds, std::span<const BBox> gts, double iou_threshold);

// One image's predictions and ground truth.
struct ImageEval {
  std::string image_id;
  std::vector<Detection> preds;
  std::vector<GroundTruth> gts;
};

// IoU thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> coco_thresholds();

struct ClassReport {
  std::vector<double> ap;  // per threshold, fraction
  std::size_t gt_count = 0;
  std::size_t pred_count = 0;
  double map() const;      // mean over thresholds, fraction
  double map50() const;    // AP at 0.50, fraction
};

struct EvalReport {
  std::map<std::string, ClassReport> classes;  // classes with ground truth
  double map = 0.0;    // percent
  double map50 = 0.0;  // percent
  std::size_t gt_count = 0;
  std::size_t pred_count = 0;
  std::vector<std::string> diagnostics;
};

// Per-class evaluation across all images; mAP averages over classes that have
// ground truth. Predictions of a class without any ground truth are counted
// and reported in diagnostics.
EvalReport map_report(std::span<const ImageEval> images);

}  // namespace inkpipe
