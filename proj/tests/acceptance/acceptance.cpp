// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "inkpipe/client.hpp"
#include "inkpipe/codec.hpp"
#include "inkpipe/ingest.hpp"
#include "inkpipe/metrics.hpp"
#include "inkpipe/mixture.hpp"
#include "inkpipe/raster.hpp"
#include "inkpipe/tasks.hpp"
#include "mock_endpoint.hpp"
#include "oracles.hpp"

using namespace inkpipe;

namespace {

using Clock = std::chrono::steady_clock;

// A check returns an empty string on success, otherwise the first failure.
using Check = std::function<std::string()>;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string cer_oracle() {
  const auto start = Clock::now();
  gen::Rng rng(1001);
  for (int i = 0; i < 10000; ++i) {
    const std::string a = gen::unicode_string(rng, 8), b = gen::unicode_string(rng, 8);
    const std::size_t got = edit_distance(a, b), want = oracle::edit_distance(a, b);
    if (got != want) return "pair " + std::to_string(i) + ": " + std::to_string(got) + " vs " + std::to_string(want);
  }
  const double s = seconds_since(start);
  if (s >= 30.0) return "took " + std::to_string(s) + " s";
  return {};
}

std::string map_oracle() {
  const std::vector<ImageEval> hand{{"p", {{"textline", {0, 0, 6, 1}, 1.0}}, {{"textline", {0, 0, 10, 1}}}}};
  const EvalReport h = map_report(hand);
  if (h.map50 != 100.0 || h.map != 30.0) {
    return "hand case gave mAP " + std::to_string(h.map) + " / mAP@50 " + std::to_string(h.map50);
  }
  gen::Rng rng(1002);
  const std::vector<std::string> labels{"textline", "word"};
  for (int iter = 0; iter < 1000; ++iter) {
    ImageEval img{"img", {}, {}};
    for (int g = gen::integer(rng, 0, 5); g > 0; --g) img.gts.push_back({labels[gen::integer(rng, 0, 1)], gen::grid_box(rng)});
    for (int p = gen::integer(rng, 0, 5); p > 0; --p) {
      img.preds.push_back({labels[gen::integer(rng, 0, 1)], gen::grid_box(rng), gen::integer(rng, 1, 4) / 4.0});
    }
    const std::vector<ImageEval> images{img};
    const EvalReport got = map_report(images);
    const oracle::OracleMap want = oracle::coco_map(images);
    bool same = got.map == want.map && got.map50 == want.map50 && got.classes.size() == want.ap.size();
    for (const auto& [cls, aps] : want.ap) same = same && got.classes.contains(cls) && got.classes.at(cls).ap == aps;
    if (!same) return "instance " + std::to_string(iter) + " differs from the oracle";
  }
  return {};
}

std::string codec_round_trip() {
  const auto literal = decode_seg_target("38 41 67 273 textline 94 106 118 200 textline", 1);
  if (literal.objects.size() != 2 || !literal.diagnostics.empty()) return "literal target did not give 2 textlines";
  for (const auto& o : literal.objects) {
    if (o.label != "textline") return "literal target decoded a non-textline";
  }
  gen::Rng rng(1003);
  std::vector<std::string> order;
  for (const auto& c : kSegClasses) order.emplace_back(c.name);
  for (int iter = 0; iter < 10000; ++iter) {
    std::vector<SegObject> objs;
    for (int n = gen::integer(rng, 0, 8); n > 0; --n) objs.push_back(gen::seg_object(rng));
    std::shuffle(order.begin(), order.end(), rng);
    const std::string encoded = encode_seg_target(objs, order);
    const DecodeResult d = decode_seg_target(encoded);
    std::vector<SegObject> expected;
    for (const auto& cls : order) {
      for (auto o : objs) {
        if (o.label != cls) continue;
        if (o.box.x_min > o.box.x_max) std::swap(o.box.x_min, o.box.x_max);
        if (o.box.y_min > o.box.y_max) std::swap(o.box.y_min, o.box.y_max);
        expected.push_back(o);
      }
    }
    if (!d.diagnostics.empty() || d.objects != expected) return "decode(encode(x)) != x at case " + std::to_string(iter);
    const std::string canonical = encode_seg_target(d.objects, appearance_order(d.objects));
    const DecodeResult again = decode_seg_target(canonical);
    if (encode_seg_target(again.objects, appearance_order(again.objects)) != canonical) {
      return "canonical string not a fixpoint at case " + std::to_string(iter);
    }
  }
  return {};
}

std::string renderer_invariants() {
  gen::Rng rng(1004);
  const CanvasSpec canvas{96, 96};
  for (int iter = 0; iter < 1000; ++iter) {
    const Ink ink = gen::ink(rng);
    const RasterImage img = render(ink, canvas);
    for (float v : img.data()) {
      if (!(v >= 0.0f && v <= 1.0f)) return "channel value out of range at ink " + std::to_string(iter);
    }
    if (!(render(ink, canvas) == img)) return "re-render differs at ink " + std::to_string(iter);
    const Similarity s{gen::uniform(rng, 0.1, 10.0), gen::uniform(rng, -1000, 1000), gen::uniform(rng, -1000, 1000)};
    if (!(render(transform(ink, s), canvas) == img)) return "similarity changed the image at ink " + std::to_string(iter);

    const RasterImage mono = render(gen::monotone_stroke(rng), canvas);
    float prev = 0.0f;
    for (int x = 0; x < mono.width(); ++x) {
      float col = -1.0f;
      for (int y = 0; y < mono.height(); ++y) {
        if (mono.at(0, x, y) > 0 || mono.at(1, x, y) > 0 || mono.at(2, x, y) > 0) col = std::max(col, mono.at(0, x, y));
      }
      if (col < 0.0f) continue;
      if (col < prev) return "R decreased along a single stroke at case " + std::to_string(iter);
      prev = col;
    }
  }
  return {};
}

std::string placement_format() {
  if (placement_string({39, 15, 67, 78}, {100, 100}) != "0.39,0.15,0.67,0.78") return "example box mismatch";
  const std::regex pattern(R"(\d\.\d\d,\d\.\d\d,\d\.\d\d,\d\.\d\d)");
  gen::Rng rng(1005);
  for (int i = 0; i < 10000; ++i) {
    const CanvasSpec c{gen::uniform(rng, 1, 4000), gen::uniform(rng, 1, 4000)};
    const BBox b = gen::box(rng, 1.0);
    const std::string s = placement_string({b.x_min * c.w, b.y_min * c.h, b.x_max * c.w, b.y_max * c.h}, c);
    if (!std::regex_match(s, pattern)) return "bad placement '" + s + "'";
  }
  return {};
}

std::string mixture_floor() {
  gen::Rng rng(1006);
  for (int iter = 0; iter < 1000; ++iter) {
    std::map<std::string, double> raw;
    const int n = gen::integer(rng, 1, 100);
    for (int i = 0; i < n; ++i) raw["l" + std::to_string(i)] = std::pow(gen::uniform(rng, 0.0, 1.0), 6);
    raw["l0"] += 0.5;
    const WeightTable in = WeightTable::normalized(raw);
    const WeightTable out = rebalance(in);
    double sum = 0.0;
    for (const auto& [k, v] : out.entries()) {
      if (v < 0.01 * (1 - 1e-12)) return "share below floor in table " + std::to_string(iter);
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) return "shares do not sum to 1 in table " + std::to_string(iter);
    std::string ref;
    for (const auto& [k, v] : out.entries()) {
      if (v <= 0.01 * (1 + 1e-9)) continue;
      if (ref.empty()) {
        ref = k;
        continue;
      }
      const double r_in = in.at(ref) / in.at(k), r_out = out.at(ref) / out.at(k);
      if (std::abs(r_out - r_in) > 1e-9 * r_in) return "ratio changed in table " + std::to_string(iter);
    }
    const WeightTable twice = rebalance(out);
    for (const auto& [k, v] : out.entries()) {
      if (std::abs(twice.at(k) - v) > 1e-12) return "not idempotent in table " + std::to_string(iter);
    }
  }

  MixtureSpec spec;
  spec.task_weights = WeightTable({{"segmentation", 0.15}, {"recognition", 0.50}, {"math", 0.15}, {"classification", 0.20}});
  spec.seed = 2024;
  SourceMap sources;
  for (const auto& [task, w] : spec.task_weights.entries()) {
    TaskExample ex;
    ex.meta.sample_id = task;
    sources[{task, ""}] = {ex};
  }
  const std::size_t n = 100000;
  std::map<std::string, double> counts;
  for (const auto& ex : sample_stream(spec, sources, n)) counts[ex.meta.sample_id] += 1;
  for (const auto& [task, w] : spec.task_weights.entries()) {
    const double freq = counts[task] / static_cast<double>(n);
    const double bound = 3.0 * std::sqrt(w * (1 - w) / static_cast<double>(n));
    if (std::abs(freq - w) > bound) return task + " frequency " + std::to_string(freq) + " outside bound";
  }
  return {};
}

std::string stats_row() {
  std::vector<PageAnnotation> pages;
  for (int i = 0; i < 10000; ++i) {
    std::vector<PageObject> objs;
    if (i < 9461) objs.assign(i < 7956 ? 5 : 4, PageObject{"textblock", {0, 0, 1, 1}, std::nullopt});
    pages.push_back({"p" + std::to_string(i), Ink({Stroke({{0, 0, 0}})}), objs, nlohmann::ordered_json::object()});
  }
  for (const auto& c : compute_stats(pages).classes) {
    if (c.label != "textblock") continue;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f%% present / %.2f avg", c.percent_present, c.avg_count);
    if (std::string(buf) != "94.61% present / 4.58 avg") return std::string("got ") + buf;
    return {};
  }
  return "no textblock row";
}

std::string end_to_end() {
  const auto start = Clock::now();
  gen::Rng rng(1008);
  SegTaskOptions opts;
  opts.levels = {2, 1};
  std::map<std::string, std::string> truth;  // sample id -> target
  std::vector<InferenceRequest> requests;
  std::vector<ImageEval> images;
  for (int i = 0; i < 20; ++i) {
    const PageAnnotation page = gen::page(rng, "page" + std::to_string(i));
    const auto png = encode_png(render(page.ink, opts.canvas));
    for (const auto& ex : seg_examples(page, opts, "")) {
      truth[ex.meta.sample_id] = ex.target;
      requests.push_back({ex.meta.sample_id, ex.prompt, png});
      ImageEval img{ex.meta.sample_id, {}, {}};
      const int level = ex.extra["level"].get<int>();
      for (const auto& o : page_objects_on_grid(page, opts)) {
        if (o.level != level) continue;
        img.gts.push_back({o.label, {double(o.box.x_min), double(o.box.y_min), double(o.box.x_max), double(o.box.y_max)}});
      }
      images.push_back(std::move(img));
    }
  }

  std::mutex mu;
  testing::MockEndpoint mock([&](const nlohmann::json& req) {
    std::lock_guard lock(mu);
    const std::string id = req["id"];
    return std::pair{200, testing::MockEndpoint::answer(id, truth.at(id))};
  });
  EndpointConfig ep;
  ep.url = mock.url();
  const auto responses = infer_batch(requests, ep);
  if (responses.size() != requests.size()) return "lost responses";

  std::map<std::string, const InferenceResponse*> by_id;
  for (const auto& r : responses) by_id[r.id] = &r;
  for (auto& img : images) {
    const InferenceResponse* r = by_id.at(img.image_id);
    if (!r->answer) return "request " + img.image_id + " failed: " + r->error.value_or("");
    const DecodeResult d = decode_seg_target(*r->answer);
    if (!d.diagnostics.empty()) return "decode diagnostics for " + img.image_id;
    for (const auto& o : d.objects) {
      img.preds.push_back({o.label, {double(o.box.x_min), double(o.box.y_min), double(o.box.x_max), double(o.box.y_max)}, 1.0});
    }
  }
  const EvalReport rep = map_report(images);
  if (rep.map != 100.0 || rep.map50 != 100.0) {
    return "mAP " + std::to_string(rep.map) + " / mAP@50 " + std::to_string(rep.map50);
  }
  const double s = seconds_since(start);
  if (s >= 60.0) return "took " + std::to_string(s) + " s";
  return {};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Check>> criteria{
      {"CER oracle equivalence", cer_oracle},
      {"mAP oracle equivalence", map_oracle},
      {"codec round-trip", codec_round_trip},
      {"renderer invariants", renderer_invariants},
      {"placement formatting", placement_format},
      {"mixture floor and task frequencies", mixture_floor},
      {"stats reproduction", stats_row},
      {"end-to-end closed loop", end_to_end},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = Clock::now();
    std::string problem;
    try {
      problem = check();
    } catch (const std::exception& e) {
      problem = std::string("exception: ") + e.what();
    }
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2f s", seconds_since(start));
    if (problem.empty()) {
      std::printf("PASS  %-36s (%s)\n", name.c_str(), timing);
    } else {
      ++failures;
      std::printf("FAIL  %-36s (%s) %s\n", name.c_str(), timing, problem.c_str());
    }
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
