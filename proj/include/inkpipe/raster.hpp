#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "inkpipe/ink.hpp"

namespace inkpipe {

// Per-point channel values of the time/distance encoding.
struct PointColor {
  double r = 0.0;  // elapsed time / max elapsed time
  double g = 0.0;  // |dx| / max |dx|
  double b = 0.0;  // |dy| / max |dy|

  friend bool operator==(const PointColor&, const PointColor&) = default;
};

// Planar RGB image with values in [0, 1]. Planes are stored R, G, B, each
// row-major.
class RasterImage {
 public:
  RasterImage(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }

  float at(int channel, int x, int y) const { return data_[index(channel, x, y)]; }
  void set(int channel, int x, int y, float v) { data_[index(channel, x, y)] = v; }

  std::span<const float> plane(int channel) const;
  std::span<const float> data() const { return data_; }

  // Interleaved RGB bytes, each value quantized as round(v * 255).
  std::vector<std::uint8_t> to_rgb8() const;

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t index(int channel, int x, int y) const {
    return (static_cast<std::size_t>(channel) * height_ + y) * width_ + x;
  }

  int width_;
  int height_;
  std::vector<float> data_;
};

struct RenderOptions {
  // Line width in pixels; <= 0 selects default_stroke_width(canvas).
  double stroke_width = 0.0;
  // Interpolate colors along a segment. When false a segment takes the color
  // of its starting point.
  bool interpolate = true;
};

// Colors in the order points appear, flattened over strokes. Expects a
// time-normalized ink. dx/dy restart at zero on the first point of each stroke
// and a channel whose maximum is zero stays zero.
std::vector<PointColor> point_colors(const Ink& ink);

// 2 px at 448 px, scaled with the smaller canvas side.
double default_stroke_width(const CanvasSpec& canvas);

// Margin that keeps a stroke of the given width inside the image.
double render_margin(double stroke_width);

// The similarity render() applies to `ink` before rasterizing; exposed so
// callers can project annotations into pixel space.
Similarity render_transform(const Ink& ink, const CanvasSpec& canvas, double stroke_width);

// Time-normalizes, fits the ink into the canvas preserving aspect ratio and
// rasterizes every segment with a disc brush on a black background.
RasterImage render(const Ink& ink, const CanvasSpec& canvas, const RenderOptions& options = {});

// Lossless 8-bit PNG. Throws IoError naming the path on failure.
void export_image(const RasterImage& image, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const RasterImage& image);

struct Rgb8Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // interleaved RGB
};

Rgb8Image decode_png(std::span<const std::uint8_t> bytes);
Rgb8Image read_png(const std::filesystem::path& path);

}  // namespace inkpipe
