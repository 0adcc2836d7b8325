#include <doctest.h>

#include <algorithm>

#include "generators.hpp"
#include "inkpipe/error.hpp"
#include "inkpipe/metrics.hpp"
#include "oracles.hpp"

using namespace inkpipe;

TEST_CASE("edit distance examples") {
  CHECK(edit_distance("kitten", "sitting") == 3);
  CHECK(edit_distance("", "abc") == 3);
  CHECK(edit_distance("abc", "abc") == 0);
  CHECK(edit_distance("\xE4\xB8\xAD\xE6\x96\x87", "\xE4\xB8\xAD") == 1);
  // Precomposed vs decomposed e-acute are equal after NFC.
  CHECK(edit_distance("caf\xC3\xA9", "cafe\xCC\x81") == 0);
  CHECK(nfc_code_points("e\xCC\x81").size() == 1);
}

TEST_CASE("cer") {
  CHECK(cer("tobe", "to be") == doctest::Approx(0.2));
  CHECK(cer("to be", "to be") == 0.0);
  CHECK_THROWS_AS(cer("x", ""), ValidationError);

  CerAccumulator acc;
  CHECK(acc.percent() == 0.0);
  acc.add("tobe", "to be");    // 1 / 5
  acc.add("abc", "abcdefghij");  // 7 / 10
  CHECK(acc.percent() == doctest::Approx(100.0 * 8.0 / 15.0));
  CHECK(acc.samples == 2);
}

TEST_CASE("edit distance matches the oracle and is a metric") {
  gen::Rng rng(101);
  for (int i = 0; i < 3000; ++i) {
    const std::string a = gen::unicode_string(rng, 8);
    const std::string b = gen::unicode_string(rng, 8);
    const std::string c = gen::unicode_string(rng, 8);
    const std::size_t ab = edit_distance(a, b);
    CHECK(ab == oracle::edit_distance(a, b));
    CHECK(ab == edit_distance(b, a));
    CHECK(edit_distance(a, a) == 0);
    CHECK(edit_distance(a, c) <= ab + edit_distance(b, c));
    const auto la = nfc_code_points(a).size(), lb = nfc_code_points(b).size();
    CHECK(ab >= (la > lb ? la - lb : lb - la));
    CHECK(ab <= std::max(la, lb));
  }
}

TEST_CASE("classification accuracy") {
  const std::vector<std::string> preds{" cat", "dog", "caf\xC3\xA9"};
  const std::vector<std::string> refs{"cat", "bird", "cafe\xCC\x81 "};
  CHECK(classification_accuracy(preds, refs) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(classification_accuracy(preds, std::vector<std::string>{"a"}), ValidationError);
}

TEST_CASE("iou") {
  CHECK(iou({0, 0, 2, 2}, {1, 0, 3, 2}) == doctest::Approx(1.0 / 3.0));
  CHECK(iou({0, 0, 1, 1}, {0, 0, 1, 1}) == 1.0);
  CHECK(iou({0, 0, 1, 1}, {2, 2, 3, 3}) == 0.0);
  CHECK(iou({0, 0, 0, 1}, {0, 0, 0, 1}) == 0.0);
}

TEST_CASE("average precision at a single overlap of 0.6") {
  // 0.6 = 6/10: [0,10]x[0,1] vs [0,6]x[0,1].
  const std::vector<Detection> preds{{"textline", {0, 0, 6, 1}, 1.0}};
  const std::vector<BBox> gts{{0, 0, 10, 1}};
  CHECK(iou(preds[0].box, gts[0]) == doctest::Approx(0.6));
  CHECK(average_precision(preds, gts, 0.5) == 1.0);
  CHECK(average_precision(preds, gts, 0.6) == 1.0);
  CHECK(average_precision(preds, gts, 0.65) == 0.0);
  CHECK(average_precision(preds, gts, 0.75) == 0.0);

  const std::vector<ImageEval> images{{"p", {{"textline", {0, 0, 6, 1}, 1.0}}, {{"textline", {0, 0, 10, 1}}}}};
  const EvalReport r = map_report(images);
  CHECK(r.map50 == 100.0);
  CHECK(r.map == 30.0);
}

TEST_CASE("map_report bookkeeping") {
  const std::vector<ImageEval> perfect{{"p", {{"word", {0, 0, 1, 1}, 0.9}}, {{"word", {0, 0, 1, 1}}}}};
  CHECK(map_report(perfect).map == 100.0);

  // Right box, wrong label: no ground truth for "box", zero AP for "word".
  const std::vector<ImageEval> mislabeled{{"p", {{"box", {0, 0, 1, 1}, 0.9}}, {{"word", {0, 0, 1, 1}}}}};
  const EvalReport r = map_report(mislabeled);
  CHECK(r.map == 0.0);
  CHECK(r.classes.size() == 1);
  CHECK(r.classes.contains("word"));
  CHECK(r.diagnostics.size() == 1);
  CHECK(r.pred_count == 1);
  CHECK(r.gt_count == 1);

  CHECK(map_report(std::vector<ImageEval>{}).map == 0.0);
  CHECK(coco_thresholds().size() == 10);
  CHECK(coco_thresholds()[2] == 0.6);
}

namespace {

std::vector<ImageEval> random_instance(gen::Rng& rng) {
  const std::vector<std::string> labels{"textline", "word"};
  std::vector<ImageEval> images;
  const int n_images = gen::integer(rng, 1, 2);
  for (int i = 0; i < n_images; ++i) {
    ImageEval img;
    img.image_id = "img" + std::to_string(i);
    const int n_gt = gen::integer(rng, 0, 5), n_pred = gen::integer(rng, 0, 5);
    for (int g = 0; g < n_gt; ++g) img.gts.push_back({labels[gen::integer(rng, 0, 1)], gen::grid_box(rng)});
    for (int p = 0; p < n_pred; ++p) {
      // Coarse scores so ties happen.
      img.preds.push_back({labels[gen::integer(rng, 0, 1)], gen::grid_box(rng), gen::integer(rng, 1, 4) / 4.0});
    }
    images.push_back(std::move(img));
  }
  return images;
}

}  // namespace

TEST_CASE("map_report matches the brute-force oracle") {
  gen::Rng rng(7);
  for (int iter = 0; iter < 1000; ++iter) {
    const auto images = random_instance(rng);
    const EvalReport got = map_report(images);
    const oracle::OracleMap want = oracle::coco_map(images);
    REQUIRE(got.classes.size() == want.ap.size());
    for (const auto& [cls, aps] : want.ap) {
      CHECK(got.classes.at(cls).ap == aps);
    }
    CHECK(got.map == want.map);
    CHECK(got.map50 == want.map50);
  }
}

TEST_CASE("AP properties") {
  gen::Rng rng(8);
  for (int iter = 0; iter < 500; ++iter) {
    std::vector<Detection> preds;
    std::vector<BBox> gts;
    for (int g = gen::integer(rng, 1, 5); g > 0; --g) gts.push_back(gen::grid_box(rng));
    for (int p = gen::integer(rng, 0, 5); p > 0; --p) preds.push_back({"c", gen::grid_box(rng), gen::uniform(rng, 0, 1)});

    double prev = 2.0;
    for (const double thr : coco_thresholds()) {
      const double ap = average_precision(preds, gts, thr);
      CHECK(ap >= 0.0);
      CHECK(ap <= 1.0);
      CHECK(ap <= prev);
      prev = ap;
    }

    // Distinct scores make the result independent of input order.
    auto shuffled = preds;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(average_precision(shuffled, gts, 0.5) == average_precision(preds, gts, 0.5));

    std::vector<Detection> exact;
    for (const auto& g : gts) exact.push_back({"c", g, 1.0});
    CHECK(average_precision(exact, gts, 0.95) == 1.0);
  }
}
