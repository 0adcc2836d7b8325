#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace inkpipe {

// A single pen sample. x/y are abstract canvas units, t is seconds.
struct Point {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Axis-aligned box in canvas units.
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct CanvasSpec {
  double w = 448.0;
  double h = 448.0;

  friend bool operator==(const CanvasSpec&, const CanvasSpec&) = default;
};

// Pen-down to pen-up trajectory. Never empty; timestamps are non-decreasing.
class Stroke {
 public:
  // Throws ValidationError on an empty point list, non-finite values or
  // decreasing timestamps.
  explicit Stroke(std::vector<Point> points);

  // Clamps a timestamp that goes backwards to its predecessor instead of
  // rejecting it. Used by the readers, since capture devices emit jitter.
  static Stroke clamped(std::vector<Point> points);

  std::span<const Point> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }

  friend bool operator==(const Stroke&, const Stroke&) = default;

 private:
  std::vector<Point> points_;
};

// Ordered strokes in capture order. Holds at least one stroke.
class Ink {
 public:
  explicit Ink(std::vector<Stroke> strokes);

  std::span<const Stroke> strokes() const { return strokes_; }
  std::size_t stroke_count() const { return strokes_.size(); }
  std::size_t point_count() const;

  friend bool operator==(const Ink&, const Ink&) = default;

 private:
  std::vector<Stroke> strokes_;
};

// Uniform scale followed by translation: p' = p * scale + offset.
struct Similarity {
  double scale = 1.0;
  double dx = 0.0;
  double dy = 0.0;

  double apply_x(double x) const { return x * scale + dx; }
  double apply_y(double y) const { return y * scale + dy; }
  BBox apply(const BBox& b) const;
};

BBox bounding_box(const Ink& ink);

// Shifts every timestamp so that the first point of the first stroke is at
// t = 0. Differences between timestamps are preserved.
Ink normalize_time(const Ink& ink);

// The transform fit_to_canvas applies. Maps `box` into the canvas minus
// `margin` with one scale factor for both axes and centers the slack axis.
// A zero-extent box is mapped to the canvas center at scale 1.
Similarity fit_transform(const BBox& box, const CanvasSpec& canvas, double margin);

Ink fit_to_canvas(const Ink& ink, const CanvasSpec& canvas, double margin = 0.0);

Ink transform(const Ink& ink, const Similarity& s);

}  // namespace inkpipe
