#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "pidparse/error.hpp"
#include "pidparse/evaluate.hpp"
#include "pidparse/pipeline.hpp"

using namespace pidparse;
namespace fs = std::filesystem;

TEST(PipelineConfig, DefaultsFromEmptyDocument) {
  const PipelineConfig c = PipelineConfig::from_json("{}");
  EXPECT_EQ(c.resize_width, 7168);
  EXPECT_EQ(c.k_text_neighbors, 5);
  ASSERT_EQ(c.graph.label_regexes.size(), 1u);
  EXPECT_EQ(c.graph.label_regexes[0], kPipeLabelRegex);
  EXPECT_DOUBLE_EQ(c.graph.eta, 0.5);
  EXPECT_DOUBLE_EQ(c.graph.cluster_eps, 50.0);
  EXPECT_EQ(c.graph.cluster_min_pts, 2);
  EXPECT_DOUBLE_EQ(c.lines.kernel_fraction, 0.001);
}

TEST(PipelineConfig, SectionsOverrideDefaults) {
  const PipelineConfig c = PipelineConfig::from_json(R"({
    "resize_width": 0, "k_text_neighbors": 3, "threads": 2,
    "lines": {"min_kernel": 9, "dash_jump_limit": 2},
    "graph": {"eta": 0.25, "label_regexes": ["^L[0-9]+$"]},
    "generator": {"count": 7}
  })");
  EXPECT_EQ(c.resize_width, 0);
  EXPECT_EQ(c.k_text_neighbors, 3);
  EXPECT_EQ(c.threads, 2);
  EXPECT_EQ(c.lines.min_kernel, 9);
  EXPECT_EQ(c.lines.dash_jump_limit, 2);
  EXPECT_DOUBLE_EQ(c.graph.eta, 0.25);
  EXPECT_EQ(c.graph.label_regexes, std::vector<std::string>{"^L[0-9]+$"});
  EXPECT_EQ(c.generator.count, 7);
}

TEST(PipelineConfig, RoundTripThroughJson) {
  PipelineConfig c;
  c.k_text_neighbors = 4;
  c.lines.min_dashes = 6;
  c.symbols.nms_iou = 0.4;
  c.generator.seed = 77;
  const PipelineConfig back = PipelineConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
}

TEST(PipelineConfig, RelativePathsResolveAgainstFile) {
  const PipelineConfig c = PipelineConfig::from_json(R"({"rules_file": "rules.json", "template_dir": "/abs/t"})", "/cfg");
  EXPECT_EQ(c.rules_file, fs::path("/cfg/rules.json"));
  EXPECT_EQ(c.template_dir, fs::path("/abs/t"));
}

TEST(PipelineConfig, InvalidValuesThrow) {
  EXPECT_THROW(PipelineConfig::from_json(R"({"k_text_neighbors": 0})"), ConfigError);
  EXPECT_THROW(PipelineConfig::from_json(R"({"resize_width": -1})"), ConfigError);
  EXPECT_THROW(PipelineConfig::from_json(R"({"lines": {"kernel_fraction": 0}})"), ConfigError);
  EXPECT_THROW(PipelineConfig::from_json(R"({"lines": {"min_dashes": 1}})"), ConfigError);
  EXPECT_THROW(PipelineConfig::from_json(R"({"graph": {"label_regexes": ["("]}})"), ConfigError);
  EXPECT_THROW(PipelineConfig::from_json("{"), ConfigError);
  EXPECT_THROW(PipelineConfig::load("/nonexistent/pipeline.json"), Error);
}

TEST(PipelineConfig, ShippedDefaultsLoad) {
  const fs::path data = fs::path(PIDPARSE_SOURCE_DIR) / "data";
  const PipelineConfig c = PipelineConfig::load(data / "pipeline.json");
  EXPECT_EQ(c.rules_file, data / "rules.json");
  EXPECT_NO_THROW(Digitizer{c});
}

TEST(Digitizer, BlankSheetGivesEmptyTables) {
  PipelineConfig c;
  c.resize_width = 0;
  const Digitizer d(c);
  const auto out = d.run(GrayRaster(900, 640, 255));
  EXPECT_TRUE(out.result.symbols.empty());
  EXPECT_TRUE(out.result.pipelines.empty());
  EXPECT_TRUE(out.lines.empty());
  EXPECT_THROW((void)d.run(GrayRaster()), DecodeError);
}

TEST(Digitizer, SmallGeneratedSheetEndToEnd) {
  GenConfig g;
  g.sheet_width = 2400;
  const auto sheet = generate_sheet(g, 0);
  PipelineConfig c;
  c.resize_width = 2400;
  c.threads = 1;
  const Digitizer d(c);
  const auto a = d.run(sheet.image);
  const auto b = d.run(sheet.image);
  EXPECT_EQ(a.result, b.result);
  EXPECT_EQ(symbols_csv(a.result.symbols), symbols_csv(b.result.symbols));

  const EvalReport r = evaluate_sheet({a.result, a.lines, a.texts}, sheet.annotation);
  EXPECT_GE(r.lines.complete(), 0.97);
  EXPECT_GE(r.text.detection(0), 0.9);
  int tp = 0, truth = 0;
  for (const auto& [cls, n] : r.symbols.per_class) {
    tp += n.tp;
    truth += n.tp + n.fn;
  }
  EXPECT_GE(static_cast<double>(tp) / truth, 0.8);
}

TEST(Digitizer, ResultsAreInInputCoordinates) {
  GenConfig g;
  g.sheet_width = 2400;
  const auto sheet = generate_sheet(g, 1);
  PipelineConfig c;
  c.resize_width = 4800;  // work at double size, report at input size
  c.threads = 1;
  const auto out = Digitizer(c).run(sheet.image);
  const Rect bounds{0, 0, sheet.image.width(), sheet.image.height()};
  ASSERT_FALSE(out.result.symbols.empty());
  for (const auto& s : out.result.symbols) EXPECT_EQ(intersect(s.bbox, bounds), s.bbox);
  for (const auto& p : out.result.pipelines) {
    EXPECT_LE(p.p2.x, bounds.w);
    EXPECT_LE(p.p2.y, bounds.h);
  }
}
