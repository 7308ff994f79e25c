#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "paint.hpp"
#include "pidparse/glyphs.hpp"
#include "pidparse/text.hpp"

using namespace pidparse;

TEST(Patches, LayoutCounts) {
  EXPECT_EQ(patch_layout(800, 800, 800, 0.5).size(), 1u);
  const auto three = patch_layout(1600, 800, 800, 0.5);
  ASSERT_EQ(three.size(), 3u);
  EXPECT_EQ(three[0].region.x, 0);
  EXPECT_EQ(three[1].region.x, 400);
  EXPECT_EQ(three[2].region.x, 800);
  EXPECT_EQ(patch_layout(7168, 4000, 800, 0.5).size(), 17u * 9u);
}

TEST(Patches, CoverEveryPixel) {
  for (auto [w, h] : {std::pair{801, 1203}, std::pair{2000, 900}, std::pair{1234, 1234}}) {
    std::vector<std::uint8_t> covered(static_cast<std::size_t>(w) * h, 0);
    for (const auto& p : patch_layout(w, h, 400, 0.5)) {
      EXPECT_EQ(p.region.w, 400);
      EXPECT_LE(p.region.right(), w);
      for (int y = p.region.y; y < p.region.bottom(); ++y)
        for (int x = p.region.x; x < p.region.right(); ++x) covered[static_cast<std::size_t>(y) * w + x] = 1;
    }
    EXPECT_EQ(std::count(covered.begin(), covered.end(), 0), 0);
  }
}

TEST(MergeBoxes, Examples) {
  std::vector<TextBox> disjoint{{{0, 0, 10, 10}}, {{50, 50, 10, 10}}};
  EXPECT_EQ(merge_boxes_iou(disjoint, 0.3).size(), 2u);
  std::vector<TextBox> dup{{{5, 5, 10, 10}, "", Orientation::horizontal, 0.4},
                           {{5, 5, 10, 10}, "", Orientation::horizontal, 0.7}};
  const auto one = merge_boxes_iou(dup, 0.3);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_DOUBLE_EQ(one[0].confidence, 0.7);
  std::vector<TextBox> pair{{{0, 0, 100, 20}}, {{50, 0, 100, 20}}};
  const auto m = merge_boxes_iou(pair, 0.3);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].bbox, (Rect{0, 0, 150, 20}));
}

TEST(MergeBoxes, IdempotentAndOrderIndependent) {
  std::mt19937 rng(4);
  std::uniform_int_distribution<int> c(0, 200), s(5, 60);
  for (int t = 0; t < 30; ++t) {
    std::vector<TextBox> boxes(25);
    for (auto& b : boxes) b.bbox = {c(rng), c(rng), s(rng), s(rng)};
    const auto merged = merge_boxes_iou(boxes, 0.3);
    EXPECT_EQ(merge_boxes_iou(merged, 0.3), merged);
    std::shuffle(boxes.begin(), boxes.end(), rng);
    EXPECT_EQ(merge_boxes_iou(boxes, 0.3), merged);
  }
}

TEST(RotationMapping, RoundTripExact) {
  std::mt19937 rng(8);
  std::uniform_int_distribution<int> c(0, 300), s(1, 80);
  for (int t = 0; t < 100; ++t) {
    const int H = 400;
    const Rect box{c(rng), c(rng) % (H - 80), s(rng), s(rng)};
    EXPECT_EQ(unrotate_box(rotate_box(box, H), H), box);
  }
  // Pixel-level check against the raster rotation.
  GrayRaster g(50, 30, 255);
  const Rect box{7, 4, 12, 9};
  for (int y = box.y; y < box.bottom(); ++y)
    for (int x = box.x; x < box.right(); ++x) g.at(x, y) = 0;
  EXPECT_EQ(paint::ink_bounds(rotate_cw(g)), rotate_box(box, 30));
}

TEST(Glyphs, AtlasCoversAlphabet) {
  const auto& atlas = GlyphAtlas::builtin();
  for (char c : std::string("ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-/\"")) EXPECT_TRUE(atlas.contains(c)) << c;
  EXPECT_EQ(glyph_scale_for_width(7168), 3);
  EXPECT_EQ(text_width_units("A1"), 12);
}

TEST(Glyphs, AtlasFileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "pidparse_atlas_test";
  std::filesystem::create_directories(dir);
  GlyphAtlas::builtin().save(dir / "atlas.png", dir / "atlas.json");
  const auto loaded = GlyphAtlas::load(dir / "atlas.png", dir / "atlas.json");
  ASSERT_EQ(loaded.glyphs().size(), GlyphAtlas::builtin().glyphs().size());
  for (const auto& [c, g] : GlyphAtlas::builtin().glyphs()) EXPECT_EQ(loaded.glyph(c).bits, g.bits);
  std::filesystem::remove_all(dir);
}

TEST(Recognizer, SelfRenderRoundTrip) {
  const auto r = glyph_template_recognize(render_text("A1", 3));
  EXPECT_EQ(r.text, "A1");
  EXPECT_GE(r.confidence, 0.99);
  EXPECT_EQ(glyph_template_recognize(GrayRaster(40, 20, 255)).text, "");
  EXPECT_DOUBLE_EQ(glyph_template_recognize(GrayRaster(40, 20, 255)).confidence, 0.0);
}

TEST(Recognizer, EveryGlyphAndLabelShapes) {
  for (int scale : {1, 2, 3, 4}) {
    for (const std::string s : {"ABCDEFGHIJKLM", "NOPQRSTUVWXYZ", "0123456789", "12\"-AB-3456", "PI 101",
                                "FT-204", "A/B", "I1I1", "WM"}) {
      GrayRaster canvas(text_width_units(s) * scale + 20, 7 * scale + 20, 255);
      paint::paste_ink(canvas, render_text(s, scale), 10, 10);
      const auto r = glyph_template_recognize(canvas);
      EXPECT_EQ(r.text, s) << "scale " << scale;
      EXPECT_GE(r.confidence, 0.99);
    }
  }
}

TEST(Recognizer, SaltAndPepperOnePercent) {
  int exact = 0;
  for (unsigned seed = 0; seed < 20; ++seed) {
    GrayRaster img = render_text("FT-204", 3);
    paint::salt_pepper(img, 0.01, seed);
    const auto r = glyph_template_recognize(img);
    exact += r.text == "FT-204";
    EXPECT_GE(r.confidence, 0.8);
  }
  EXPECT_EQ(exact, 20);
}

TEST(InkDetector, FindsLabelAndIgnoresLines) {
  GrayRaster sheet(800, 600, 255);
  const auto text = render_text("P-104", 3);
  paint::paste_ink(sheet, text, 100, 200);
  for (int x = 50; x < 700; ++x)
    for (int t = 0; t < 3; ++t) sheet.at(x, 300 + t) = 0;
  for (int x = 50; x < 700; x += 21)
    for (int d = 0; d < 14; ++d)
      for (int t = 0; t < 3; ++t) sheet.at(x + d, 400 + t) = 0;
  InkTextDetector det(3);
  const auto boxes = det.detect(sheet);
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_EQ(boxes[0].bbox, (Rect{100, 200, text.width(), text.height()}));
}

TEST(ExtractText, BlankSheet) {
  InkTextDetector det(3);
  GlyphRecognizer rec;
  EXPECT_TRUE(extract_text(GrayRaster(1000, 900, 255), det, rec, {}).boxes.empty());
}

TEST(ExtractText, HorizontalAndVerticalLabels) {
  GrayRaster sheet(2000, 1500, 255);
  const auto h = render_text("P-104", 3);
  paint::paste_ink(sheet, h, 790, 390);  // straddles patch borders
  const auto v = rotate_cw(render_text("AB-123", 3), 3);
  paint::paste_ink(sheet, v, 1500, 900);
  InkTextDetector det(3);
  GlyphRecognizer rec;
  const auto res = extract_text(sheet, det, rec, {});
  ASSERT_EQ(res.boxes.size(), 2u);
  EXPECT_EQ(res.boxes[0].text, "P-104");
  EXPECT_EQ(res.boxes[0].orientation, Orientation::horizontal);
  EXPECT_GE(iou(res.boxes[0].bbox, {790, 390, h.width(), h.height()}), 0.9);
  EXPECT_EQ(res.boxes[1].text, "AB-123");
  EXPECT_EQ(res.boxes[1].orientation, Orientation::vertical);
  EXPECT_GE(iou(res.boxes[1].bbox, {1500, 900, v.width(), v.height()}), 0.9);
  EXPECT_TRUE(res.warnings.empty());
}

namespace {
class ThrowingDetector : public TextDetector {
 public:
  std::vector<ScoredBox> detect(const GrayRaster&) const override { throw std::runtime_error("boom"); }
};
}  // namespace

TEST(ExtractText, DetectorFailureBecomesWarning) {
  ThrowingDetector det;
  GlyphRecognizer rec;
  const auto res = extract_text(GrayRaster(900, 900, 255), det, rec, {});
  EXPECT_TRUE(res.boxes.empty());
  EXPECT_FALSE(res.warnings.empty());
}
