#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "commands.hpp"
#include "pidparse/aggregate.hpp"
#include "pidparse/image_io.hpp"

namespace cli = pidparse::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("pidparse_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  // Two small sheets; the pipeline config works at their native width.
  fs::path small_dataset() {
    spit(root_ / "gen.json", R"({"generator": {"sheet_width": 2400, "count": 2, "seed": 5}})");
    spit(root_ / "pipe.json", R"({"resize_width": 0, "threads": 1})");
    cli::GenerateOptions g;
    g.config = root_ / "gen.json";
    g.out_dir = root_ / "data";
    EXPECT_EQ(cli::cmd_generate(g, out_, err_), cli::kOk) << err_.str();
    return root_ / "data";
  }

  fs::path root_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(CliTest, GenerateWritesManifestImagesAndAnnotations) {
  const fs::path data = small_dataset();
  EXPECT_TRUE(fs::is_regular_file(data / "manifest.json"));
  EXPECT_TRUE(fs::is_regular_file(data / "images" / "sheet_0000.png"));
  int images = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(data / "images")) ++images;
  EXPECT_EQ(images, 2);

  // Same seed, same bytes.
  cli::GenerateOptions g;
  g.config = root_ / "gen.json";
  g.out_dir = root_ / "again";
  ASSERT_EQ(cli::cmd_generate(g, out_, err_), cli::kOk);
  EXPECT_EQ(slurp(data / "manifest.json"), slurp(root_ / "again" / "manifest.json"));
}

TEST_F(CliTest, GenerateFailures) {
  cli::GenerateOptions g;
  g.config = root_ / "missing.json";
  g.out_dir = root_ / "x";
  EXPECT_EQ(cli::cmd_generate(g, out_, err_), cli::kUsageError);

  g.config.clear();
  g.count = 0;
  EXPECT_EQ(cli::cmd_generate(g, out_, err_), cli::kUsageError);

  g.count = 1;
  g.out_dir = "/proc/pidparse_cannot_write";
  EXPECT_NE(cli::cmd_generate(g, out_, err_), cli::kOk);
  EXPECT_FALSE(err_.str().empty());
}

TEST_F(CliTest, DigitizeEvaluateOverlay) {
  const fs::path data = small_dataset();
  std::vector<fs::path> sheets;
  for (const auto& e : fs::directory_iterator(data / "images")) sheets.push_back(e.path());
  std::sort(sheets.begin(), sheets.end());

  cli::DigitizeOptions d;
  d.sheets = sheets;
  d.config = root_ / "pipe.json";
  d.out_dir = root_ / "pred";
  d.write_graph = true;
  ASSERT_EQ(cli::cmd_digitize(d, out_, err_), cli::kOk) << err_.str();
  d.out_dir = root_ / "pred2";
  ASSERT_EQ(cli::cmd_digitize(d, out_, err_), cli::kOk);
  for (const auto& s : sheets) {
    const fs::path a = root_ / "pred" / s.stem();
    const fs::path b = root_ / "pred2" / s.stem();
    for (const char* f : {"symbols.csv", "pipelines.csv", "lines.csv", "texts.csv", "graph.json"}) {
      ASSERT_TRUE(fs::is_regular_file(a / f)) << a / f;
      EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    EXPECT_EQ(slurp(a / "symbols.csv").rfind("symbol_id,", 0), 0u);
  }

  cli::EvaluateOptions e;
  e.pred_dir = root_ / "pred";
  e.truth_dir = data;
  ASSERT_EQ(cli::cmd_evaluate(e, out_, err_), cli::kOk) << err_.str();
  const auto report = nlohmann::json::parse(slurp(root_ / "pred" / "report.json"));
  EXPECT_EQ(report.at("sheets").get<int>(), 2);
  EXPECT_TRUE(fs::is_regular_file(root_ / "pred" / "confusion.csv"));

  // Drop one prediction: the missing id is reported and the exit code is 1.
  fs::remove_all(root_ / "pred2" / sheets[0].stem());
  e.pred_dir = root_ / "pred2";
  EXPECT_EQ(cli::cmd_evaluate(e, out_, err_), cli::kPartialFailure);
  EXPECT_NE(err_.str().find(sheets[0].stem().string()), std::string::npos);

  cli::OverlayOptions o;
  o.sheet = sheets[1];
  o.result_dir = root_ / "pred" / sheets[1].stem();
  o.out_png = root_ / "overlay.png";
  ASSERT_EQ(cli::cmd_overlay(o, out_, err_), cli::kOk) << err_.str();
  const auto img = pidparse::load_gray_file(o.out_png);
  const auto src = pidparse::load_gray_file(sheets[1]);
  EXPECT_EQ(img.width(), src.width());
  EXPECT_EQ(img.height(), src.height());

  o.compare_hough = true;
  o.out_png = root_ / "hough.png";
  ASSERT_EQ(cli::cmd_overlay(o, out_, err_), cli::kOk) << err_.str();
  EXPECT_EQ(pidparse::load_gray_file(o.out_png).width(), 2 * src.width());
}

TEST_F(CliTest, EmptyPredictionDirectoryScoresZero) {
  const fs::path data = small_dataset();
  fs::create_directories(root_ / "empty");
  cli::EvaluateOptions e;
  e.pred_dir = root_ / "empty";
  e.truth_dir = data;
  ASSERT_EQ(cli::cmd_evaluate(e, out_, err_), cli::kOk) << err_.str();
  const auto report = nlohmann::json::parse(slurp(root_ / "empty" / "report.json"));
  EXPECT_EQ(report.at("sheets").get<int>(), 2);
}

TEST_F(CliTest, OverlayOfEmptyResultKeepsPixels) {
  pidparse::GrayRaster sheet(300, 200, 255);
  for (int x = 20; x < 280; ++x) sheet.at(x, 100) = 0;
  pidparse::save_png(sheet, root_ / "s.png");
  fs::create_directories(root_ / "r");
  spit(root_ / "r" / "symbols.csv", pidparse::symbols_csv({}));
  spit(root_ / "r" / "pipelines.csv", pidparse::pipelines_csv({}));

  cli::OverlayOptions o;
  o.sheet = root_ / "s.png";
  o.result_dir = root_ / "r";
  o.out_png = root_ / "o.png";
  ASSERT_EQ(cli::cmd_overlay(o, out_, err_), cli::kOk) << err_.str();
  EXPECT_EQ(pidparse::load_gray_file(o.out_png), sheet);
}

TEST_F(CliTest, DigitizeFailures) {
  cli::DigitizeOptions d;
  d.out_dir = root_ / "o";
  EXPECT_EQ(cli::cmd_digitize(d, out_, err_), cli::kUsageError);

  spit(root_ / "bad.png", "not an image");
  d.sheets = {root_ / "bad.png"};
  EXPECT_EQ(cli::cmd_digitize(d, out_, err_), cli::kPartialFailure);

  d.config = root_ / "missing.json";
  EXPECT_EQ(cli::cmd_digitize(d, out_, err_), cli::kUsageError);
}

TEST_F(CliTest, AssetsWritesConfigsAndTemplates) {
  cli::AssetsOptions a;
  a.out_dir = root_ / "assets";
  a.sheet_width = 2400;
  ASSERT_EQ(cli::cmd_assets(a, out_, err_), cli::kOk) << err_.str();
  for (const char* f : {"pipeline.json", "rules.json", "composition.json"})
    EXPECT_TRUE(fs::is_regular_file(root_ / "assets" / f)) << f;
  EXPECT_TRUE(fs::is_directory(root_ / "assets" / "templates"));
}
