#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "paint.hpp"
#include "pidparse/draw.hpp"
#include "pidparse/error.hpp"
#include "pidparse/symbol_catalog.hpp"
#include "pidparse/symbol_detect.hpp"

using namespace pidparse;

namespace {

constexpr int kSize = 86;  // complex symbol size on a 7168 px wide sheet

const TemplateBank& bank() {
  static const TemplateBank b = TemplateBank::build(kSize);
  return b;
}

class FixedClassifier : public FineGrainedClassifier {
 public:
  FixedClassifier(int c, double s) : c_(c), s_(s) {}
  ClassScore classify(const GrayRaster&) const override { return {c_, s_}; }

 private:
  int c_;
  double s_;
};

class OneBoxLocalizer : public SymbolLocalizer {
 public:
  std::vector<ScoredBox> propose(const GrayRaster& patch) const override {
    if (paint::ink_bounds(patch).empty()) return {};
    return {{paint::ink_bounds(patch), 0.9}};
  }
};

class ThrowingLocalizer : public SymbolLocalizer {
 public:
  std::vector<ScoredBox> propose(const GrayRaster&) const override { throw std::runtime_error("boom"); }
};

// Brute-force NMS reference: repeatedly take the best remaining box and strike
// everything overlapping it.
std::vector<ScoredBox> nms_oracle(std::vector<ScoredBox> boxes, double t) {
  std::vector<ScoredBox> kept;
  std::vector<bool> gone(boxes.size(), false);
  while (true) {
    int best = -1;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (gone[i]) continue;
      if (best < 0) {
        best = static_cast<int>(i);
        continue;
      }
      const auto& a = boxes[i];
      const auto& b = boxes[best];
      if (std::tuple(-a.score, a.bbox.y, a.bbox.x, a.bbox.h, a.bbox.w) <
          std::tuple(-b.score, b.bbox.y, b.bbox.x, b.bbox.h, b.bbox.w))
        best = static_cast<int>(i);
    }
    if (best < 0) break;
    kept.push_back(boxes[best]);
    for (std::size_t i = 0; i < boxes.size(); ++i)
      if (!gone[i] && iou(boxes[i].bbox, boxes[best].bbox) >= t) gone[i] = true;
  }
  return kept;
}

}  // namespace

TEST(Nms, MatchesOracleAndLeavesNoOverlap) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> pos(0, 200), ext(5, 60), sc(0, 100);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ScoredBox> boxes;
    const int n = 1 + trial % 25;
    for (int i = 0; i < n; ++i) boxes.push_back({{pos(rng), pos(rng), ext(rng), ext(rng)}, sc(rng) / 100.0});
    const auto got = nms(boxes, 0.5);
    const auto want = nms_oracle(boxes, 0.5);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i].bbox, want[i].bbox);
    for (std::size_t i = 0; i < got.size(); ++i)
      for (std::size_t j = i + 1; j < got.size(); ++j) EXPECT_LT(iou(got[i].bbox, got[j].bbox), 0.5);
  }
}

TEST(Ncc, IdentityAndConstant) {
  const auto a = render_symbol(3, 64);
  EXPECT_NEAR(ncc(a, a), 1.0, 1e-12);
  EXPECT_EQ(ncc(a, GrayRaster(64, 64, 255)), 0.0);
}

TEST(TemplateLocalize, BlankPatchIsEmpty) {
  TemplateLocalizer loc(bank());
  EXPECT_TRUE(loc.propose(GrayRaster(400, 400, 255)).empty());
}

TEST(TemplateLocalize, ExactRenderScoresHighAtItsLocation) {
  TemplateLocalizer loc(bank());
  for (int c : {1, 7, 13, 25}) {
    GrayRaster patch(400, 400, 255);
    const auto sym = render_symbol(c, kSize);
    paint::paste_ink(patch, sym, 150, 120);
    const Rect truth = paint::ink_bounds(patch);
    const auto props = loc.propose(patch);
    ASSERT_FALSE(props.empty()) << c;
    const auto best = *std::max_element(props.begin(), props.end(),
                                        [](const ScoredBox& a, const ScoredBox& b) { return a.score < b.score; });
    EXPECT_GE(best.score, 0.95) << c;
    EXPECT_GE(iou(best.bbox, truth), 0.9) << c;
  }
}

TEST(TemplateLocalize, RotatedAndNoisyRender) {
  TemplateLocalizer loc(bank());
  GrayRaster patch(400, 400, 255);
  paint::paste_ink(patch, render_symbol(18, kSize, 90), 40, 200);
  paint::salt_pepper(patch, 0.02, 11);
  const Rect truth{40 + paint::ink_bounds(render_symbol(18, kSize, 90)).x,
                   200 + paint::ink_bounds(render_symbol(18, kSize, 90)).y,
                   paint::ink_bounds(render_symbol(18, kSize, 90)).w, paint::ink_bounds(render_symbol(18, kSize, 90)).h};
  const auto props = loc.propose(patch);
  double best = 0;
  for (const auto& p : props)
    if (iou(p.bbox, truth) >= 0.75) best = std::max(best, p.score);
  EXPECT_GE(best, 0.8);
}

TEST(TemplateClassify, SelfMatchRotationAndBlank) {
  TemplateClassifier cls(bank());
  const auto r3 = render_symbol(3, kSize);
  auto c = cls.classify(crop(r3, paint::ink_bounds(r3)));
  EXPECT_EQ(c.class_id, 3);
  EXPECT_GE(c.score, 0.99);
  const auto r90 = render_symbol(3, kSize, 90);
  c = cls.classify(crop(r90, paint::ink_bounds(r90)));
  EXPECT_EQ(c.class_id, 3);
  EXPECT_GE(c.score, 0.95);
  c = cls.classify(GrayRaster(50, 40, 255));
  EXPECT_EQ(c.class_id, kOthers);
  EXPECT_EQ(c.score, 0.0);
}

TEST(TemplateClassify, IdentityArgmaxForEveryClassAndRotation) {
  TemplateClassifier cls(bank());
  for (int c = 1; c <= kComplexClassCount; ++c)
    for (int rot : {0, 90, 180, 270}) {
      const auto r = render_symbol(c, kSize, rot);
      EXPECT_EQ(cls.classify(crop(r, paint::ink_bounds(r))).class_id, c) << c << " @" << rot;
    }
}

TEST(TemplateClassify, OtherScalesStillIdentify) {
  TemplateClassifier cls(bank());
  for (int c = 1; c <= kComplexClassCount; ++c) {
    const auto r = render_symbol(c, 70);
    EXPECT_EQ(cls.classify(crop(r, paint::ink_bounds(r))).class_id, c) << c;
  }
}

TEST(TemplateBankIo, SaveLoadRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "pidparse_bank_test";
  std::filesystem::remove_all(dir);
  bank().save(dir);
  const auto back = TemplateBank::load(dir);
  EXPECT_EQ(back.size, kSize);
  ASSERT_EQ(back.entries.size(), bank().entries.size());
  for (std::size_t i = 0; i < back.entries.size(); ++i) {
    EXPECT_EQ(back.entries[i].class_id, bank().entries[i].class_id);
    EXPECT_EQ(back.entries[i].mask, bank().entries[i].mask);
  }
  EXPECT_THROW(TemplateBank::load(dir / "missing"), Error);
  std::filesystem::remove_all(dir);
}

TEST(DetectComplex, BlankSheet) {
  TemplateLocalizer loc(bank());
  TemplateClassifier cls(bank());
  const auto d = detect_complex_symbols(GrayRaster(1200, 800, 255), loc, cls, {});
  EXPECT_TRUE(d.symbols.empty());
  EXPECT_TRUE(d.warnings.empty());
}

TEST(DetectComplex, SingleClassSevenRoundTrip) {
  TemplateLocalizer loc(bank());
  TemplateClassifier cls(bank());
  GrayRaster sheet(1200, 800, 255);
  // Straddles the patch boundary at x = 400.
  paint::paste_ink(sheet, render_symbol(7, kSize), 360, 300);
  const Rect truth = paint::ink_bounds(sheet);
  const auto d = detect_complex_symbols(sheet, loc, cls, {});
  ASSERT_EQ(d.symbols.size(), 1u);
  EXPECT_EQ(d.symbols[0].class_id, 7);
  EXPECT_GE(iou(d.symbols[0].bbox, truth), 0.75);
  EXPECT_GE(d.symbols[0].score, 0.9);
}

TEST(DetectComplex, BelowClassifierThresholdBecomesOthers) {
  OneBoxLocalizer loc;
  FixedClassifier cls(3, 0.85);
  GrayRaster sheet(400, 400, 255);
  fill_rect(sheet, {100, 100, 30, 30});
  const auto d = detect_complex_symbols(sheet, loc, cls, {});
  ASSERT_EQ(d.symbols.size(), 1u);
  EXPECT_EQ(d.symbols[0].class_id, kOthers);
}

TEST(DetectComplex, ThresholdSemantics) {
  OneBoxLocalizer loc;
  for (double s : {0.0, 0.5, 0.89, 0.9, 0.95, 1.0}) {
    FixedClassifier cls(5, s);
    GrayRaster sheet(400, 400, 255);
    fill_rect(sheet, {100, 100, 30, 30});
    for (const auto& sym : detect_complex_symbols(sheet, loc, cls, {}).symbols) {
      if (sym.class_id != kOthers) EXPECT_GE(sym.score, 0.9);
      EXPECT_EQ(sym.class_id == 5, s >= 0.9);
    }
  }
}

TEST(DetectComplex, FailingLocalizerWarnsAndContinues) {
  ThrowingLocalizer loc;
  TemplateClassifier cls(bank());
  const auto d = detect_complex_symbols(GrayRaster(600, 400, 255), loc, cls, {});
  EXPECT_TRUE(d.symbols.empty());
  EXPECT_FALSE(d.warnings.empty());
}

TEST(DetectComplex, ConfigValidation) {
  SymbolDetectConfig cfg;
  cfg.localizer_min = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.classifier_min = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
