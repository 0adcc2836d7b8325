#include "inkpipe/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "inkpipe/error.hpp"

namespace inkpipe {
namespace {

// Fitted coordinates are snapped to 1/64 px so that inks which differ only by
// a similarity transform (and hence by float rounding after fitting) rasterize
// to identical pixels.
constexpr double kSubpixel = 64.0;

double snap(double v) { return std::round(v * kSubpixel) / kSubpixel; }

float unit(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

struct Brush {
  std::vector<std::pair<int, int>> offsets;

  explicit Brush(double width) {
    const double r = 0.5 * width;
    const int reach = static_cast<int>(std::floor(r));
    for (int oy = -reach; oy <= reach; ++oy) {
      for (int ox = -reach; ox <= reach; ++ox) {
        if (ox * ox + oy * oy <= r * r) offsets.emplace_back(ox, oy);
      }
    }
    if (offsets.empty()) offsets.emplace_back(0, 0);
  }
};

class Canvas {
 public:
  Canvas(RasterImage& img, const Brush& brush) : img_(img), brush_(brush) {}

  void stamp(double x, double y, const PointColor& c) {
    const int cx = std::clamp(static_cast<int>(std::floor(x)), 0, img_.width() - 1);
    const int cy = std::clamp(static_cast<int>(std::floor(y)), 0, img_.height() - 1);
    const float r = unit(c.r), g = unit(c.g), b = unit(c.b);
    for (const auto& [ox, oy] : brush_.offsets) {
      const int px = cx + ox;
      const int py = cy + oy;
      if (px < 0 || py < 0 || px >= img_.width() || py >= img_.height()) continue;
      img_.set(0, px, py, r);
      img_.set(1, px, py, g);
      img_.set(2, px, py, b);
    }
  }

  void segment(const Point& p0, const PointColor& c0, const Point& p1, const PointColor& c1,
               bool interpolate) {
    const double dx = p1.x - p0.x;
    const double dy = p1.y - p0.y;
    const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(dx), std::abs(dy)))));
    for (int k = 0; k <= steps; ++k) {
      const double s = static_cast<double>(k) / steps;
      PointColor c = c0;
      if (interpolate) {
        c = {c0.r + s * (c1.r - c0.r), c0.g + s * (c1.g - c0.g), c0.b + s * (c1.b - c0.b)};
      } else if (k == steps) {
        c = c1;
      }
      stamp(p0.x + s * dx, p0.y + s * dy, c);
    }
  }

 private:
  RasterImage& img_;
  const Brush& brush_;
};

}  // namespace

RasterImage::RasterImage(int width, int height)
    : width_(width), height_(height),
      data_(3 * static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), 0.0f) {
  if (width <= 0 || height <= 0) throw ValidationError("image dimensions must be positive");
}

std::span<const float> RasterImage::plane(int channel) const {
  const std::size_t n = static_cast<std::size_t>(width_) * height_;
  return std::span<const float>(data_).subspan(channel * n, n);
}

std::vector<std::uint8_t> RasterImage::to_rgb8() const {
  std::vector<std::uint8_t> out(3 * static_cast<std::size_t>(width_) * height_);
  std::size_t o = 0;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      for (int c = 0; c < 3; ++c) {
        out[o++] = static_cast<std::uint8_t>(std::lround(std::clamp(at(c, x, y), 0.0f, 1.0f) * 255.0));
      }
    }
  }
  return out;
}

std::vector<PointColor> point_colors(const Ink& ink) {
  std::vector<PointColor> colors;
  colors.reserve(ink.point_count());
  double max_t = 0.0, max_dx = 0.0, max_dy = 0.0;
  for (const auto& stroke : ink.strokes()) {
    for (std::size_t j = 0; j < stroke.size(); ++j) {
      const Point& p = stroke[j];
      PointColor c{p.t, 0.0, 0.0};
      if (j > 0) {
        c.g = std::abs(p.x - stroke[j - 1].x);
        c.b = std::abs(p.y - stroke[j - 1].y);
      }
      max_t = std::max(max_t, c.r);
      max_dx = std::max(max_dx, c.g);
      max_dy = std::max(max_dy, c.b);
      colors.push_back(c);
    }
  }
  auto ratio = [](double v, double max) { return max > 0.0 ? std::clamp(v / max, 0.0, 1.0) : 0.0; };
  for (auto& c : colors) {
    c = {ratio(c.r, max_t), ratio(c.g, max_dx), ratio(c.b, max_dy)};
  }
  return colors;
}

double default_stroke_width(const CanvasSpec& canvas) {
  return 2.0 * std::min(canvas.w, canvas.h) / 448.0;
}

double render_margin(double stroke_width) { return std::ceil(0.5 * stroke_width) + 1.0; }

namespace {

CanvasSpec pixel_canvas(const CanvasSpec& canvas) {
  const CanvasSpec px{std::round(canvas.w), std::round(canvas.h)};
  if (px.w < 8.0 || px.h < 8.0) {
    throw ValidationError("canvas must be at least 8x8 pixels, got " + std::to_string(px.w) + "x" +
                          std::to_string(px.h));
  }
  return px;
}

double effective_width(const CanvasSpec& px, double requested) {
  return requested > 0.0 ? requested : default_stroke_width(px);
}

}  // namespace

Similarity render_transform(const Ink& ink, const CanvasSpec& canvas, double stroke_width) {
  const CanvasSpec px = pixel_canvas(canvas);
  const double width = effective_width(px, stroke_width);
  return fit_transform(bounding_box(ink), px, render_margin(width));
}

RasterImage render(const Ink& ink, const CanvasSpec& canvas, const RenderOptions& options) {
  const CanvasSpec px = pixel_canvas(canvas);
  const double width = effective_width(px, options.stroke_width);
  const Ink timed = normalize_time(ink);
  const Similarity fit = fit_transform(bounding_box(timed), px, render_margin(width));

  std::vector<Stroke> strokes;
  strokes.reserve(timed.stroke_count());
  for (const auto& stroke : timed.strokes()) {
    std::vector<Point> pts;
    pts.reserve(stroke.size());
    for (const auto& p : stroke.points()) pts.push_back({snap(fit.apply_x(p.x)), snap(fit.apply_y(p.y)), p.t});
    strokes.emplace_back(std::move(pts));
  }
  const Ink fitted(std::move(strokes));
  const std::vector<PointColor> colors = point_colors(fitted);

  RasterImage img(static_cast<int>(px.w), static_cast<int>(px.h));
  const Brush brush(width);
  Canvas canvas_ops(img, brush);
  std::size_t base = 0;
  for (const auto& stroke : fitted.strokes()) {
    if (stroke.size() == 1) {
      canvas_ops.stamp(stroke[0].x, stroke[0].y, colors[base]);
    }
    for (std::size_t j = 1; j < stroke.size(); ++j) {
      canvas_ops.segment(stroke[j - 1], colors[base + j - 1], stroke[j], colors[base + j], options.interpolate);
    }
    base += stroke.size();
  }
  return img;
}

}  // namespace inkpipe
