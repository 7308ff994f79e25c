#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pidparse/raster.hpp"

namespace pidparse {

/// One glyph cell in font units; bits are row-major, true = ink.
struct Glyph {
  int width = 5;
  int height = 7;
  std::vector<std::uint8_t> bits;

  [[nodiscard]] bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
};

/// Bitmap font used for rendering labels on generated sheets and as the
/// reference set of the default recognizer. Cell size is 5x7 units; glyphs
/// are separated by 2 units and a space advances 3 units.
class GlyphAtlas {
 public:
  static constexpr int kCellWidth = 5;
  static constexpr int kCellHeight = 7;
  static constexpr int kSpacing = 2;
  static constexpr int kSpaceWidth = 3;

  GlyphAtlas() = default;
  explicit GlyphAtlas(std::map<char, Glyph> glyphs);

  /// A-Z, 0-9, '-', '/', '"'.
  static const GlyphAtlas& builtin();

  [[nodiscard]] bool contains(char c) const { return glyphs_.count(c) != 0; }
  [[nodiscard]] const Glyph& glyph(char c) const;
  [[nodiscard]] const std::map<char, Glyph>& glyphs() const { return glyphs_; }

  /// PNG sprite plus JSON index {"glyphs": {char: {x, y, w, h}}} next to it.
  void save(const std::filesystem::path& png_path, const std::filesystem::path& json_path) const;
  static GlyphAtlas load(const std::filesystem::path& png_path, const std::filesystem::path& json_path);

 private:
  std::map<char, Glyph> glyphs_;
};

/// Pixel scale of the font on a sheet of the given width (unit = scale px).
int glyph_scale_for_width(int sheet_width);

/// Width in font units of a rendered string.
int text_width_units(std::string_view text);

/// Renders `text` in black on white; the raster is text_width_units x 7 units.
/// Throws ConfigError for characters the atlas does not contain.
GrayRaster render_text(std::string_view text, int scale, const GlyphAtlas& atlas = GlyphAtlas::builtin());

struct Recognition {
  std::string text;
  double confidence = 0.0;
};

/// Reads one line of atlas-font text. The crop is split into glyph cells at
/// column-projection valleys; each cell is matched by normalized
/// cross-correlation against every atlas glyph. Confidence is the mean score.
Recognition glyph_template_recognize(const GrayRaster& crop, const GlyphAtlas& atlas = GlyphAtlas::builtin());

}  // namespace pidparse
