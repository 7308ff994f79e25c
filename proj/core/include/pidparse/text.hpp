#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pidparse/glyphs.hpp"
#include "pidparse/raster.hpp"

namespace pidparse {

struct TextBox {
  Rect bbox;
  std::string text;
  Orientation orientation = Orientation::horizontal;
  double confidence = 0.0;

  friend bool operator==(const TextBox&, const TextBox&) = default;
};

struct ScoredBox {
  Rect bbox;
  double score = 0.0;
};

/// Proposes text regions in a patch. Boxes are in patch coordinates.
class TextDetector {
 public:
  virtual ~TextDetector() = default;
  virtual std::vector<ScoredBox> detect(const GrayRaster& patch) const = 0;
  /// False makes the caller serialize detect() calls.
  [[nodiscard]] virtual bool thread_safe() const { return true; }
};

/// Reads a single-line crop; confidence in [0, 1].
class TextRecognizer {
 public:
  virtual ~TextRecognizer() = default;
  virtual Recognition recognize(const GrayRaster& crop) const = 0;
  [[nodiscard]] virtual bool thread_safe() const { return true; }
};

/// Ink-component text proposer tuned for the atlas font: long lines are
/// removed, glyph-sized components are joined along baselines, and runs of at
/// least two glyphs with a horizontal aspect become boxes (tight ink bounds).
class InkTextDetector : public TextDetector {
 public:
  explicit InkTextDetector(int glyph_scale) : scale_(glyph_scale) {}
  std::vector<ScoredBox> detect(const GrayRaster& patch) const override;

 private:
  int scale_;
};

class GlyphRecognizer : public TextRecognizer {
 public:
  explicit GlyphRecognizer(const GlyphAtlas& atlas = GlyphAtlas::builtin()) : atlas_(&atlas) {}
  Recognition recognize(const GrayRaster& crop) const override {
    return glyph_template_recognize(crop, *atlas_);
  }

 private:
  const GlyphAtlas* atlas_;
};

struct Patch {
  Rect region;  // offset and size in sheet coordinates
};

/// Tiles a width x height sheet with size x size windows at stride
/// size * (1 - overlap); the last row and column are clamped to the border.
std::vector<Patch> patch_layout(int width, int height, int size, double overlap);

struct PatchView {
  GrayRaster patch;
  Point offset;
};
std::vector<PatchView> split_patches(const GrayRaster& sheet, int size, double overlap);

/// Transitively merges boxes whose IOU is at least iou_min into their union,
/// until no pair qualifies. Result is sorted by (y, x, h, w).
std::vector<TextBox> merge_boxes_iou(std::vector<TextBox> boxes, double iou_min);

struct TextConfig {
  int patch_size = 800;
  double patch_overlap = 0.5;
  double merge_iou = 0.3;
  bool vertical_pass = true;
  double vertical_duplicate_iou = 0.5;
  int threads = 1;

  void validate() const;
};

struct TextExtraction {
  std::vector<TextBox> boxes;
  std::vector<std::string> warnings;
};

/// Maps a box from the clockwise-rotated frame back to a sheet of the given height.
Rect unrotate_box(const Rect& rotated, int sheet_height);
/// Maps a sheet box into the clockwise-rotated frame.
Rect rotate_box(const Rect& box, int sheet_height);

/// Horizontal pass over patches, then a second pass on the sheet rotated
/// clockwise for vertical text. Boxes are recognized after merging.
TextExtraction extract_text(const GrayRaster& sheet, const TextDetector& det, const TextRecognizer& rec,
                            const TextConfig& cfg);

}  // namespace pidparse
