#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "inkpipe/codec.hpp"
#include "inkpipe/error.hpp"
#include "inkpipe/ingest.hpp"
#include "inkpipe/metrics.hpp"
#include "inkpipe/mixture.hpp"
#include "inkpipe/raster.hpp"

namespace py = pybind11;
using namespace inkpipe;

namespace {

Ink ink_from_lists(const std::vector<std::vector<std::vector<double>>>& strokes) {
  std::vector<Stroke> out;
  for (const auto& s : strokes) {
    std::vector<Point> pts;
    for (const auto& p : s) {
      if (p.size() != 3) throw ValidationError("point must be [x, y, t]");
      pts.push_back({p[0], p[1], p[2]});
    }
    out.emplace_back(std::move(pts));
  }
  return Ink(std::move(out));
}

// (H, W, 3) float32 array sharing the image's planar buffer through strides.
py::array_t<float> to_array(RasterImage img) {
  auto* owned = new RasterImage(std::move(img));
  py::capsule release(owned, [](void* p) { delete static_cast<RasterImage*>(p); });
  const auto w = static_cast<py::ssize_t>(owned->width()), h = static_cast<py::ssize_t>(owned->height());
  const py::ssize_t f = sizeof(float);
  return py::array_t<float>({h, w, py::ssize_t{3}}, {w * f, f, w * h * f}, owned->data().data(), release);
}

py::list objects_to_py(const std::vector<SegObject>& objects) {
  py::list out;
  for (const auto& o : objects) {
    out.append(py::make_tuple(o.label, o.box.x_min, o.box.y_min, o.box.x_max, o.box.y_max));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_inkpipe, m) {
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def(
      "render_ink",
      [](const std::vector<std::vector<std::vector<double>>>& strokes, int canvas, double width) {
        RenderOptions ro;
        ro.stroke_width = width;
        return to_array(render(ink_from_lists(strokes), CanvasSpec{double(canvas), double(canvas)}, ro));
      },
      py::arg("strokes"), py::arg("canvas") = 448, py::arg("width") = 0.0);

  m.def(
      "placement",
      [](const std::vector<std::vector<std::vector<double>>>& strokes, double w, double h) {
        return placement_string(bounding_box(ink_from_lists(strokes)), CanvasSpec{w, h});
      },
      py::arg("strokes"), py::arg("width"), py::arg("height"));

  m.def(
      "encode_target",
      [](const std::vector<std::tuple<std::string, int, int, int, int>>& objects,
         const std::vector<std::string>& classes) {
        std::vector<SegObject> objs;
        for (const auto& [label, x0, y0, x1, y1] : objects) {
          const auto level = class_level(label);
          if (!level) throw ValidationError("unknown segmentation class '" + label + "'");
          objs.push_back({label, *level, {x0, y0, x1, y1}});
        }
        return encode_seg_target(objs, classes.empty() ? appearance_order(objs) : classes);
      },
      py::arg("objects"), py::arg("classes") = std::vector<std::string>{});

  m.def(
      "decode_target",
      [](const std::string& text, std::optional<int> level) {
        const DecodeResult r = decode_seg_target(text, level);
        return py::make_tuple(objects_to_py(r.objects), r.diagnostics);
      },
      py::arg("text"), py::arg("level") = py::none());

  m.def("edit_distance", [](const std::string& a, const std::string& b) { return edit_distance(a, b); });
  m.def("cer", [](const std::string& pred, const std::string& ref) { return cer(pred, ref); });

  m.def(
      "sample_stream",
      [](const std::filesystem::path& spec_path, std::size_t n) {
        const MixtureConfig cfg = load_mixture_config(spec_path);
        const auto stream = sample_stream(cfg.spec, load_sources(cfg), n);
        py::list out;
        for (const auto& ex : stream) out.append(to_json(ex).dump());
        return out;
      },
      py::arg("spec_path"), py::arg("n"));
}
