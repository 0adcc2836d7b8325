#include <doctest.h>

#include <fstream>
#include <set>

#include "generators.hpp"
#include "inkpipe/error.hpp"
#include "inkpipe/raster.hpp"
#include "temp_dir.hpp"

using namespace inkpipe;

namespace {

Ink one_stroke(std::vector<Point> pts) { return Ink({Stroke(std::move(pts))}); }

}  // namespace

TEST_CASE("point_colors examples") {
  const auto single = point_colors(one_stroke({{1, 2, 0}}));
  REQUIRE(single.size() == 1);
  CHECK(single[0] == PointColor{0, 0, 0});

  // |dx| = [0,3,3], |dy| = [0,0,4], t = [0,1,2]
  const auto c = point_colors(one_stroke({{0, 0, 0}, {3, 0, 1}, {0, 4, 2}}));
  REQUIRE(c.size() == 3);
  CHECK(c[0] == PointColor{0.0, 0.0, 0.0});
  CHECK(c[1] == PointColor{0.5, 1.0, 0.0});
  CHECK(c[2] == PointColor{1.0, 1.0, 1.0});

  // Differences restart on the second stroke.
  const auto two = point_colors(Ink({Stroke({{0, 0, 0}, {1, 0, 1}}), Stroke({{5, 5, 2}})}));
  REQUIRE(two.size() == 3);
  CHECK(two[2] == PointColor{1.0, 0.0, 0.0});
  CHECK(two[1].g == 1.0);

  // Purely vertical writing: G stays zero.
  const auto vertical = point_colors(one_stroke({{2, 0, 0}, {2, 5, 1}}));
  CHECK(vertical[1] == PointColor{1.0, 0.0, 1.0});
}

TEST_CASE("render dimensions and background") {
  const RasterImage img = render(one_stroke({{3, 3, 0}}), {64, 64});
  CHECK(img.width() == 64);
  CHECK(img.height() == 64);
  for (float v : img.data()) CHECK(v == 0.0f);

  const RasterImage rect = render(one_stroke({{0, 0, 0}, {1, 2, 1}}), {100.4, 31.6});
  CHECK(rect.width() == 100);
  CHECK(rect.height() == 32);

  CHECK_THROWS_AS(render(one_stroke({{0, 0, 0}}), {7, 64}), ValidationError);
}

TEST_CASE("horizontal stroke has increasing time channel") {
  const RasterImage img = render(one_stroke({{0, 0, 0}, {10, 0, 1}}), {64, 64}, {.stroke_width = 1.0});
  const int row = 32;
  float prev = -1.0f;
  int lit = 0;
  for (int x = 0; x < 64; ++x) {
    const float r = img.at(0, x, row);
    // Unlit pixels stay black; lit ones must not decrease.
    if (img.at(0, x, row) == 0.0f && img.at(1, x, row) == 0.0f) continue;
    ++lit;
    CHECK(r >= prev);
    prev = r;
  }
  CHECK(lit > 50);
  CHECK(prev == 1.0f);
  CHECK(img.at(0, 2, row) == doctest::Approx(0.0).epsilon(0.05));
}

TEST_CASE("segment coloring without interpolation uses the start color") {
  const Ink ink = one_stroke({{0, 0, 0}, {10, 0, 1}, {20, 0, 2}});
  const RasterImage img = render(ink, {64, 64}, {.stroke_width = 1.0, .interpolate = false});
  std::set<float> reds;
  for (int x = 0; x < 64; ++x) {
    if (img.at(1, x, 32) > 0.0f) reds.insert(img.at(0, x, 32));
  }
  // The first segment starts with G = 0 and so never passes the filter.
  CHECK(reds == std::set<float>{0.5f, 1.0f});
}

TEST_CASE("render invariants over random inks") {
  gen::Rng rng(11);
  for (int iter = 0; iter < 200; ++iter) {
    const Ink ink = gen::ink(rng);
    const CanvasSpec canvas{64, 48};
    const RasterImage img = render(ink, canvas);
    for (float v : img.data()) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
    CHECK(render(ink, canvas) == img);

    const double scale = gen::uniform(rng, 0.1, 10.0);
    const Similarity s{scale, gen::uniform(rng, -1000, 1000), gen::uniform(rng, -1000, 1000)};
    CHECK(render(transform(ink, s), canvas) == img);
  }
}

TEST_CASE("png export round-trips quantized values") {
  testing::TempDir dir;
  const RasterImage img = render(one_stroke({{0, 0, 0}, {3, 0, 1}, {0, 4, 2}}), {32, 32});
  export_image(img, dir / "a.png");
  const Rgb8Image back = read_png(dir / "a.png");
  CHECK(back.width == 32);
  CHECK(back.height == 32);
  CHECK(back.pixels == img.to_rgb8());

  RasterImage tiny(1, 1);
  tiny.set(0, 0, 0, 0.5f);
  tiny.set(1, 0, 0, 1.0f / 255.0f * 0.49f);
  tiny.set(2, 0, 0, 1.0f);
  CHECK(tiny.to_rgb8() == std::vector<std::uint8_t>{128, 0, 255});
}

TEST_CASE("png export reports the failing path") {
  const RasterImage img(8, 8);
  try {
    export_image(img, "/nonexistent-dir/x.png");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("/nonexistent-dir/x.png") != std::string::npos);
  }
}

TEST_CASE("default stroke width scales with the canvas") {
  CHECK(default_stroke_width({448, 448}) == 2.0);
  CHECK(default_stroke_width({224, 300}) == 1.0);
}

TEST_CASE("time channel grows along x-monotone strokes") {
  // Later stamps overwrite earlier ones, so the latest stamp reaching a column
  // sets that column's largest R; it moves right as time advances.
  gen::Rng rng(19);
  for (int iter = 0; iter < 200; ++iter) {
    const RasterImage img = render(gen::monotone_stroke(rng), {96, 96});
    float prev = 0.0f;
    for (int x = 0; x < img.width(); ++x) {
      float col = -1.0f;
      bool lit = false;
      for (int y = 0; y < img.height(); ++y) {
        const bool on = img.at(0, x, y) > 0 || img.at(1, x, y) > 0 || img.at(2, x, y) > 0;
        if (on) {
          lit = true;
          col = std::max(col, img.at(0, x, y));
        }
      }
      if (!lit) continue;
      CHECK(col >= prev);
      prev = col;
    }
  }
}
