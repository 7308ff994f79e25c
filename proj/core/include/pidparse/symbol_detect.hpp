#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pidparse/raster.hpp"
#include "pidparse/symbol.hpp"
#include "pidparse/text.hpp"

namespace pidparse {

/// Proposes symbol regions in a patch; boxes in patch coordinates, scores in [0, 1].
class SymbolLocalizer {
 public:
  virtual ~SymbolLocalizer() = default;
  virtual std::vector<ScoredBox> propose(const GrayRaster& patch) const = 0;
  [[nodiscard]] virtual bool thread_safe() const { return true; }
};

struct ClassScore {
  int class_id = kOthers;
  double score = 0.0;
};

/// Assigns a class to a symbol crop; score in [0, 1].
class FineGrainedClassifier {
 public:
  virtual ~FineGrainedClassifier() = default;
  virtual ClassScore classify(const GrayRaster& crop) const = 0;
  [[nodiscard]] virtual bool thread_safe() const { return true; }
};

struct TemplateEntry {
  int class_id = kOthers;
  std::string name;
  GrayRaster mask;  // size x size canvas, unrotated
};

/// One rendered mask per class at a canonical canvas size.
struct TemplateBank {
  int size = 0;
  std::vector<TemplateEntry> entries;

  /// Renders the complex classes 1..25 at `size`.
  static TemplateBank build(int size);
  /// Writes class_<id>.png per entry plus manifest.json.
  void save(const std::filesystem::path& dir) const;
  /// Throws ConfigError / DecodeError / IoError.
  static TemplateBank load(const std::filesystem::path& dir);
};

/// Default localizer: normalized cross-correlation of the per-rotation union
/// of all class masks at scales {0.75, 1, 1.25}; each local maximum above the
/// proposal floor is rescored as the best single-class correlation nearby and
/// boxed with that class's ink bounds.
class TemplateLocalizer : public SymbolLocalizer {
 public:
  explicit TemplateLocalizer(const TemplateBank& bank, double floor = 0.5);
  std::vector<ScoredBox> propose(const GrayRaster& patch) const override;

 private:
  struct Variant {
    int class_id;
    int rotation;
    GrayRaster mask;
    Rect ink;
  };
  struct Level {
    int size;
    int rotation;
    GrayRaster union_mask;
    GrayRaster union_half;  // union_mask at half resolution
    std::vector<std::size_t> members;  // indices into variants_
  };
  std::vector<Variant> variants_;
  std::vector<Level> levels_;
  double floor_;
  int min_size_ = 0;  // smallest level side
};

/// Default classifier: crop and templates are padded to a centered square and
/// resized to the canonical size; argmax correlation over classes and the four
/// rotations, with near-ties (within 0.02) re-scored on the central region.
class TemplateClassifier : public FineGrainedClassifier {
 public:
  explicit TemplateClassifier(const TemplateBank& bank);
  ClassScore classify(const GrayRaster& crop) const override;

 private:
  struct Normalized {
    int class_id;
    GrayRaster image;
  };
  int size_;
  std::vector<Normalized> templates_;
};

/// Square canvas of side `size` holding `crop` centered and scaled so its
/// longer side fills the canvas. Exposed for tests.
GrayRaster normalize_symbol_crop(const GrayRaster& crop, int size);

/// Zero-mean normalized cross-correlation of two equal-size rasters over the
/// given region; 0 when either side is constant.
double ncc(const GrayRaster& a, const GrayRaster& b, const Rect& region);
double ncc(const GrayRaster& a, const GrayRaster& b);

/// Greedy non-maximum suppression: higher score first (ties by y, x); a box
/// is dropped when its IOU with a kept box is at least iou_min.
std::vector<ScoredBox> nms(std::vector<ScoredBox> boxes, double iou_min);

struct SymbolDetectConfig {
  int patch_size = 400;
  double patch_overlap = 0.5;
  double localizer_min = 0.8;
  double classifier_min = 0.9;
  double nms_iou = 0.5;
  int threads = 1;

  void validate() const;
};

struct SymbolDetection {
  std::vector<SymbolInstance> symbols;
  std::vector<std::string> warnings;
};

/// Localize on overlapping patches, keep proposals at or above localizer_min,
/// suppress duplicates, then classify each crop. Scores below classifier_min
/// yield kOthers. Output sorted by (y, x).
SymbolDetection detect_complex_symbols(const GrayRaster& sheet, const SymbolLocalizer& loc,
                                       const FineGrainedClassifier& cls, const SymbolDetectConfig& cfg);

}  // namespace pidparse
