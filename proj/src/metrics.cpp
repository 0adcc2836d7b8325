#include "inkpipe/metrics.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "inkpipe/error.hpp"

namespace inkpipe {
namespace {

const icu::Normalizer2& nfc_normalizer() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || n == nullptr) throw std::runtime_error("ICU NFC normalizer unavailable");
  return *n;
}

icu::UnicodeString normalized(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const auto src = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  icu::UnicodeString out = nfc_normalizer().normalize(src, status);
  if (U_FAILURE(status)) throw ValidationError("NFC normalization failed");
  return out;
}

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

}  // namespace

std::u32string nfc_code_points(std::string_view utf8) {
  const icu::UnicodeString s = normalized(utf8);
  std::u32string out(static_cast<std::size_t>(s.countChar32()), U'\0');
  UErrorCode status = U_ZERO_ERROR;
  s.toUTF32(reinterpret_cast<UChar32*>(out.data()), static_cast<int32_t>(out.size()), status);
  return out;
}

std::string nfc(std::string_view utf8) {
  std::string out;
  normalized(utf8).toUTF8String(out);
  return out;
}

std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  return edit_distance(nfc_code_points(a), nfc_code_points(b));
}

double cer(std::string_view pred, std::string_view ref) {
  const std::u32string r = nfc_code_points(ref);
  if (r.empty()) throw ValidationError("CER is undefined for an empty reference");
  return static_cast<double>(edit_distance(nfc_code_points(pred), r)) / static_cast<double>(r.size());
}

void CerAccumulator::add(std::string_view pred, std::string_view ref) {
  const std::u32string r = nfc_code_points(ref);
  distance += edit_distance(nfc_code_points(pred), r);
  ref_length += r.size();
  ++samples;
}

double CerAccumulator::percent() const {
  return ref_length == 0 ? 0.0 : 100.0 * static_cast<double>(distance) / static_cast<double>(ref_length);
}

double classification_accuracy(std::span<const std::string> preds, std::span<const std::string> refs) {
  if (preds.size() != refs.size()) {
    throw ValidationError("prediction count " + std::to_string(preds.size()) + " differs from reference count " +
                          std::to_string(refs.size()));
  }
  if (preds.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (nfc(trim(preds[i])) == nfc(trim(refs[i]))) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

// ---- detection -------------------------------------------------------------

double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<double> coco_thresholds() {
  std::vector<double> t;
  for (int k = 50; k <= 95; k += 5) t.push_back(k / 100.0);
  return t;
}

namespace {

struct ScoredMatch {
  double score;
  bool true_positive;
};

// Greedy COCO matching of one image's class-filtered predictions.
void match_image(std::span<const Detection* const> preds, std::span<const BBox* const> gts, double threshold,
                 std::vector<ScoredMatch>& out) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return preds[a]->score > preds[b]->score; });
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t pi : order) {
    double best = threshold;
    std::ptrdiff_t best_gt = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double v = iou(preds[pi]->box, *gts[g]);
      if (v >= best) {
        // Strictly better IoU wins; the first ground truth wins ties.
        if (best_gt < 0 || v > best) {
          best = v;
          best_gt = static_cast<std::ptrdiff_t>(g);
        }
      }
    }
    if (best_gt >= 0) taken[static_cast<std::size_t>(best_gt)] = true;
    out.push_back({preds[pi]->score, best_gt >= 0});
  }
}

// 101-point interpolated AP over matches pooled from all images.
double interpolated_ap(std::vector<ScoredMatch> matches, std::size_t gt_count) {
  if (gt_count == 0) return 0.0;
  std::stable_sort(matches.begin(), matches.end(),
                   [](const ScoredMatch& a, const ScoredMatch& b) { return a.score > b.score; });
  std::vector<double> precision(matches.size()), recall(matches.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    if (matches[i].true_positive) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(gt_count);
  }
  for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double sum = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / 101.0;
}

}  // namespace

double average_precision(std::span<const Detection> preds, std::span<const BBox> gts, double iou_threshold) {
  std::vector<const Detection*> p;
  for (const auto& d : preds) p.push_back(&d);
  std::vector<const BBox*> g;
  for (const auto& b : gts) g.push_back(&b);
  std::vector<ScoredMatch> matches;
  match_image(p, g, iou_threshold, matches);
  return interpolated_ap(std::move(matches), gts.size());
}

double ClassReport::map() const {
  if (ap.empty()) return 0.0;
  return std::accumulate(ap.begin(), ap.end(), 0.0) / static_cast<double>(ap.size());
}

double ClassReport::map50() const { return ap.empty() ? 0.0 : ap.front(); }

EvalReport map_report(std::span<const ImageEval> images) {
  EvalReport report;
  std::set<std::string> gt_classes, pred_classes;
  for (const auto& img : images) {
    for (const auto& g : img.gts) gt_classes.insert(g.label);
    for (const auto& d : img.preds) {
      pred_classes.insert(d.label);
      if (d.score < 0.0 || d.score > 1.0) {
        report.diagnostics.push_back("image " + img.image_id + ": score outside [0,1] for '" + d.label + "'");
      }
    }
    report.gt_count += img.gts.size();
    report.pred_count += img.preds.size();
  }
  for (const auto& cls : pred_classes) {
    if (!gt_classes.contains(cls)) {
      std::size_t n = 0;
      for (const auto& img : images) {
        n += static_cast<std::size_t>(
            std::count_if(img.preds.begin(), img.preds.end(), [&](const Detection& d) { return d.label == cls; }));
      }
      report.diagnostics.push_back("class '" + cls + "' has no ground truth; " + std::to_string(n) +
                                   " prediction(s) counted as false positives");
    }
  }

  const std::vector<double> thresholds = coco_thresholds();
  for (const auto& cls : gt_classes) {
    ClassReport cr;
    for (double t : thresholds) {
      std::vector<ScoredMatch> matches;
      std::size_t gt_count = 0;
      std::size_t pred_count = 0;
      for (const auto& img : images) {
        std::vector<const Detection*> p;
        for (const auto& d : img.preds) {
          if (d.label == cls) p.push_back(&d);
        }
        std::vector<const BBox*> g;
        for (const auto& gt : img.gts) {
          if (gt.label == cls) g.push_back(&gt.box);
        }
        gt_count += g.size();
        pred_count += p.size();
        match_image(p, g, t, matches);
      }
      cr.gt_count = gt_count;
      cr.pred_count = pred_count;
      cr.ap.push_back(interpolated_ap(std::move(matches), gt_count));
    }
    report.classes.emplace(cls, std::move(cr));
  }

  if (!report.classes.empty()) {
    // Sum first, scale once: keeps e.g. 3 of 10 thresholds at exactly 30.0.
    double m = 0.0, m50 = 0.0;
    for (const auto& [_, cr] : report.classes) {
      m += std::accumulate(cr.ap.begin(), cr.ap.end(), 0.0);
      m50 += cr.map50();
    }
    const double n = static_cast<double>(report.classes.size());
    report.map = 100.0 * m / (n * static_cast<double>(thresholds.size()));
    report.map50 = 100.0 * m50 / n;
  } else {
    report.diagnostics.push_back("no ground truth boxes; mAP reported as 0");
  }
  return report;
}

}  // namespace inkpipe
