#include "inkpipe/ink.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "inkpipe/error.hpp"

namespace inkpipe {
namespace {

void check_finite(const Point& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.t)) {
    throw ValidationError("point has a non-finite coordinate or timestamp");
  }
}

}  // namespace

Stroke::Stroke(std::vector<Point> points) : points_(std::move(points)) {
  if (points_.empty()) throw ValidationError("stroke must contain at least one point");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    check_finite(points_[i]);
    if (i > 0 && points_[i].t < points_[i - 1].t) {
      throw ValidationError("stroke timestamps decrease at point " + std::to_string(i));
    }
  }
}

Stroke Stroke::clamped(std::vector<Point> points) {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].t < points[i - 1].t) points[i].t = points[i - 1].t;
  }
  return Stroke(std::move(points));
}

Ink::Ink(std::vector<Stroke> strokes) : strokes_(std::move(strokes)) {
  if (strokes_.empty()) throw ValidationError("ink must contain at least one stroke");
}

std::size_t Ink::point_count() const {
  std::size_t n = 0;
  for (const auto& s : strokes_) n += s.size();
  return n;
}

BBox Similarity::apply(const BBox& b) const {
  return {apply_x(b.x_min), apply_y(b.y_min), apply_x(b.x_max), apply_y(b.y_max)};
}

BBox bounding_box(const Ink& ink) {
  const Point& first = ink.strokes().front()[0];
  BBox box{first.x, first.y, first.x, first.y};
  for (const auto& stroke : ink.strokes()) {
    for (const auto& p : stroke.points()) {
      box.x_min = std::min(box.x_min, p.x);
      box.y_min = std::min(box.y_min, p.y);
      box.x_max = std::max(box.x_max, p.x);
      box.y_max = std::max(box.y_max, p.y);
    }
  }
  return box;
}

Ink normalize_time(const Ink& ink) {
  const double t0 = ink.strokes().front()[0].t;
  std::vector<Stroke> strokes;
  strokes.reserve(ink.stroke_count());
  for (const auto& stroke : ink.strokes()) {
    std::vector<Point> pts(stroke.points().begin(), stroke.points().end());
    for (auto& p : pts) p.t -= t0;
    // Earlier strokes may carry timestamps below t0 on jittery devices.
    strokes.push_back(Stroke::clamped(std::move(pts)));
  }
  return Ink(std::move(strokes));
}

Similarity fit_transform(const BBox& box, const CanvasSpec& canvas, double margin) {
  if (!(canvas.w > 0.0) || !(canvas.h > 0.0)) {
    throw ValidationError("canvas dimensions must be positive");
  }
  if (margin < 0.0 || 2.0 * margin >= std::min(canvas.w, canvas.h)) {
    throw ValidationError("margin " + std::to_string(margin) + " does not fit the canvas");
  }
  const double avail_w = canvas.w - 2.0 * margin;
  const double avail_h = canvas.h - 2.0 * margin;
  const double bw = box.width();
  const double bh = box.height();

  double scale = 1.0;
  if (bw > 0.0 && bh > 0.0) {
    scale = std::min(avail_w / bw, avail_h / bh);
  } else if (bw > 0.0) {
    scale = avail_w / bw;
  } else if (bh > 0.0) {
    scale = avail_h / bh;
  }
  // Center the scaled box in the canvas; on the tight axis this lands exactly
  // on the margin.
  const double cx = 0.5 * (box.x_min + box.x_max);
  const double cy = 0.5 * (box.y_min + box.y_max);
  return {scale, 0.5 * canvas.w - cx * scale, 0.5 * canvas.h - cy * scale};
}

Ink transform(const Ink& ink, const Similarity& s) {
  std::vector<Stroke> strokes;
  strokes.reserve(ink.stroke_count());
  for (const auto& stroke : ink.strokes()) {
    std::vector<Point> pts;
    pts.reserve(stroke.size());
    for (const auto& p : stroke.points()) pts.push_back({s.apply_x(p.x), s.apply_y(p.y), p.t});
    strokes.emplace_back(std::move(pts));
  }
  return Ink(std::move(strokes));
}

Ink fit_to_canvas(const Ink& ink, const CanvasSpec& canvas, double margin) {
  return transform(ink, fit_transform(bounding_box(ink), canvas, margin));
}

}  // namespace inkpipe
