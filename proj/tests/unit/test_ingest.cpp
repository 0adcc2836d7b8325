#include <doctest.h>

#include <fstream>
#include <sstream>

#include "generators.hpp"
#include "inkpipe/error.hpp"
#include "inkpipe/ingest.hpp"
#include "temp_dir.hpp"

using namespace inkpipe;

namespace {
const std::filesystem::path kFixtures = INKPIPE_FIXTURES;
}

TEST_CASE("InkML fixture") {
  const auto docs = read_inkml(kFixtures / "sample.inkml");
  REQUIRE(docs.size() == 1);
  const InkmlDocument& d = docs[0];
  REQUIRE(d.ink.strokes().size() == 3);
  CHECK(d.ink.point_count() == 6);
  CHECK(d.ink.strokes()[0].points()[2].y == 30);
  CHECK(d.ink.strokes()[1].points()[1].t == doctest::Approx(0.06));
  CHECK_FALSE(d.synthesized_time);
  CHECK(d.annotations.at("truth") == "hi");
  REQUIRE(d.groups.size() == 2);
  CHECK(d.groups[0].label == "h");
  CHECK(d.groups[0].traces == std::vector<std::size_t>{0, 1});
  CHECK(d.groups[1].traces == std::vector<std::size_t>{2});
  CHECK(d.diagnostics.empty());
}

TEST_CASE("InkML without timestamps") {
  const auto docs = parse_inkml(R"(<ink><trace>0 0, 1 1</trace></ink>)");
  REQUIRE(docs.size() == 1);
  const auto& pts = docs[0].ink.strokes()[0].points();
  CHECK(pts[0].t == 0.0);
  CHECK(pts[1].t == doctest::Approx(0.01));
  CHECK(docs[0].synthesized_time);
}

TEST_CASE("InkML traceFormat reorders channels") {
  const auto docs = parse_inkml(
      R"(<ink><traceFormat><channel name="T"/><channel name="Y"/><channel name="X"/></traceFormat>)"
      R"(<trace>0 5 7, 1 6 8</trace></ink>)");
  const auto& p = docs[0].ink.strokes()[0].points()[1];
  CHECK(p.x == 8);
  CHECK(p.y == 6);
  CHECK(p.t == 1);
}

TEST_CASE("InkML errors") {
  CHECK_THROWS_AS(parse_inkml("<ink></ink>"), ValidationError);
  CHECK_THROWS_AS(parse_inkml("<inkml/>"), ValidationError);
  try {
    parse_inkml("<ink>\n<trace>0 0\n</ink>", "bad.inkml");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("bad.inkml:3") != std::string::npos);
  }
  // A bad trace is reported and skipped; the rest survives.
  const auto docs = parse_inkml("<ink><trace>0 0, x y</trace><trace>1 1, 2 2</trace></ink>");
  CHECK(docs[0].ink.strokes().size() == 1);
  CHECK(docs[0].diagnostics.size() == 1);
  CHECK_THROWS_AS(read_inkml(kFixtures / "missing.inkml"), IoError);
}

TEST_CASE("NDJSON sketches") {
  const NdjsonResult r = read_ndjson_sketches(kFixtures / "sketches.ndjson");
  REQUIRE(r.records.size() == 2);
  CHECK(r.diagnostics.size() == 2);
  CHECK(r.diagnostics[0].starts_with("line 3"));
  CHECK(r.records[0].label == "circle");
  CHECK(r.records[0].ink.strokes()[0].points()[4].t == doctest::Approx(0.06));
  CHECK(r.records[1].ink.strokes().size() == 2);
  // Untimed sketches get the synthesized clock.
  CHECK(r.records[1].ink.strokes()[1].points()[1].t == doctest::Approx(0.03));
}

TEST_CASE("JSONL round trip") {
  testing::TempDir dir;
  gen::Rng rng(2);
  std::vector<PageAnnotation> pages;
  for (int i = 0; i < 5; ++i) pages.push_back(gen::page(rng, "p" + std::to_string(i)));
  pages[1].objects[0].text = "h\xC3\xA9llo";
  pages[2].extra["writer"] = "w1";
  write_jsonl(dir / "pages.jsonl", pages);
  CHECK(read_pages_jsonl(dir / "pages.jsonl") == pages);

  TaskExample ex;
  ex.image = "img/0.png";
  ex.prompt = "What is written in the image? Language - Precontext -";
  ex.target = "hello";
  ex.meta = {"iam", "en", "s0"};
  ex.extra["split"] = "train";
  const std::vector<TaskExample> exs{ex};
  write_jsonl(dir / "ex.jsonl", exs);
  CHECK(read_examples_jsonl(dir / "ex.jsonl") == exs);

  std::ifstream in(dir / "ex.jsonl");
  std::string line;
  std::getline(in, line);
  CHECK(line.starts_with(R"({"v":1,"kind":"example","task":"recognition")"));
}

TEST_CASE("JSONL fixture pages keep unknown fields") {
  const auto pages = read_pages_jsonl(kFixtures / "pages.jsonl");
  REQUIRE(pages.size() == 2);
  CHECK(pages[0].extra["writer"] == "w17");
  CHECK(pages[0].objects[0].text == "hello");
  CHECK_FALSE(pages[0].objects[1].text.has_value());
  CHECK(to_json(pages[0]).dump().find("\"writer\":\"w17\"") != std::string::npos);
}

TEST_CASE("JSONL errors") {
  testing::TempDir dir;
  {
    std::ofstream(dir / "empty.jsonl");
    std::ofstream(dir / "v2.jsonl") << R"({"v":2,"kind":"page","id":"x","ink":[[[0,0,0]]],"objects":[]})" << "\n";
    std::ofstream(dir / "broken.jsonl") << "\n{\"v\":1}\n{oops\n";
  }
  CHECK(read_pages_jsonl(dir / "empty.jsonl").empty());
  try {
    read_pages_jsonl(dir / "v2.jsonl");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("v=2") != std::string::npos);
    CHECK(msg.find("v=1") != std::string::npos);
  }
  try {
    read_json_lines(dir / "broken.jsonl");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  CHECK_THROWS_AS(read_pages_jsonl(dir / "nope.jsonl"), IoError);
}

namespace {

PageAnnotation page_with(const std::string& id, const std::vector<std::string>& labels) {
  std::vector<PageObject> objs;
  for (const auto& l : labels) objs.push_back({l, {0, 0, 1, 1}, std::nullopt});
  return {id, Ink({Stroke({{0, 0, 0}})}), objs, nlohmann::ordered_json::object()};
}

const ClassStats& find(const DatasetStats& s, const std::string& label) {
  for (const auto& c : s.classes) {
    if (c.label == label) return c;
  }
  throw std::out_of_range(label);
}

}  // namespace

TEST_CASE("stats examples") {
  const std::vector<PageAnnotation> pages{page_with("a", {"table"}), page_with("b", {})};
  const DatasetStats s = compute_stats(pages);
  CHECK(s.pages == 2);
  CHECK(find(s, "table").percent_present == 50.0);
  CHECK(find(s, "table").avg_count == 0.5);
  CHECK(find(s, "word").percent_present == 0.0);
  CHECK(s.classes.size() == 11);

  const std::vector<PageAnnotation> odd{page_with("a", {"scribble", "scribble"})};
  const DatasetStats s2 = compute_stats(odd);
  CHECK(s2.classes.back().label == "scribble");
  CHECK_FALSE(s2.classes.back().level.has_value());
  CHECK(s2.classes.back().avg_count == 2.0);

  const std::string table = format_stats_table(s);
  CHECK(table.find("50.00") != std::string::npos);
  CHECK(table.find("0.50") != std::string::npos);
}

TEST_CASE("stats reproduce a constructed textblock row") {
  // 10000 pages, 9461 with textblocks, 45800 textblocks in total.
  std::vector<PageAnnotation> pages;
  for (int i = 0; i < 10000; ++i) {
    std::vector<std::string> labels;
    if (i < 9461) labels.assign(i < 7956 ? 5 : 4, "textblock");
    pages.push_back(page_with("p" + std::to_string(i), labels));
  }
  const ClassStats& tb = find(compute_stats(pages), "textblock");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f/%.2f", tb.percent_present, tb.avg_count);
  CHECK(std::string(buf) == "94.61/4.58");
  CHECK(tb.instances == 45800);
}
