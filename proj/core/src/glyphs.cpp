#include "pidparse/glyphs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "pidparse/error.hpp"
#include "pidparse/image_io.hpp"

namespace pidparse {

namespace {

struct GlyphRows {
  char c;
  std::array<const char*, 7> rows;
};

// clang-format off
constexpr GlyphRows kFont[] = {
  {'A', {" ### ", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"}},
  {'B', {"#### ", "#   #", "#   #", "#### ", "#   #", "#   #", "#### "}},
  {'C', {" ### ", "#   #", "#    ", "#    ", "#    ", "#   #", " ### "}},
  {'D', {"#### ", "#   #", "#   #", "#   #", "#   #", "#   #", "#### "}},
  {'E', {"#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#####"}},
  {'F', {"#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#    "}},
  {'G', {" ### ", "#   #", "#    ", "# ###", "#   #", "#   #", " ####"}},
  {'H', {"#   #", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"}},
  {'I', {" ### ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "}},
  {'J', {"  ###", "   # ", "   # ", "   # ", "   # ", "#  # ", " ##  "}},
  {'K', {"#   #", "#  # ", "# #  ", "##   ", "# #  ", "#  # ", "#   #"}},
  {'L', {"#    ", "#    ", "#    ", "#    ", "#    ", "#    ", "#####"}},
  {'M', {"#   #", "## ##", "# # #", "# # #", "#   #", "#   #", "#   #"}},
  {'N', {"#   #", "#   #", "##  #", "# # #", "#  ##", "#   #", "#   #"}},
  {'O', {" ### ", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "}},
  {'P', {"#### ", "#   #", "#   #", "#### ", "#    ", "#    ", "#    "}},
  {'Q', {" ### ", "#   #", "#   #", "#   #", "# # #", "#  # ", " ## #"}},
  {'R', {"#### ", "#   #", "#   #", "#### ", "# #  ", "#  # ", "#   #"}},
  {'S', {" ####", "#    ", "#    ", " ### ", "    #", "    #", "#### "}},
  {'T', {"#####", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  "}},
  {'U', {"#   #", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "}},
  {'V', {"#   #", "#   #", "#   #", "#   #", "#   #", " # # ", "  #  "}},
  {'W', {"#   #", "#   #", "#   #", "# # #", "# # #", "# # #", " # # "}},
  {'X', {"#   #", "#   #", " # # ", "  #  ", " # # ", "#   #", "#   #"}},
  {'Y', {"#   #", "#   #", " # # ", "  #  ", "  #  ", "  #  ", "  #  "}},
  {'Z', {"#####", "    #", "   # ", "  #  ", " #   ", "#    ", "#####"}},
  {'0', {" ### ", "#   #", "#  ##", "# # #", "##  #", "#   #", " ### "}},
  {'1', {"  #  ", " ##  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "}},
  {'2', {" ### ", "#   #", "    #", "   # ", "  #  ", " #   ", "#####"}},
  {'3', {"#####", "   # ", "  #  ", "   # ", "    #", "#   #", " ### "}},
  {'4', {"   # ", "  ## ", " # # ", "#  # ", "#####", "   # ", "   # "}},
  {'5', {"#####", "#    ", "#### ", "    #", "    #", "#   #", " ### "}},
  {'6', {"  ## ", " #   ", "#    ", "#### ", "#   #", "#   #", " ### "}},
  {'7', {"#####", "    #", "   # ", "  #  ", " #   ", " #   ", " #   "}},
  {'8', {" ### ", "#   #", "#   #", " ### ", "#   #", "#   #", " ### "}},
  {'9', {" ### ", "#   #", "#   #", " ####", "    #", "   # ", " ##  "}},
  {'-', {"     ", "     ", "     ", "#####", "     ", "     ", "     "}},
  {'/', {"    #", "    #", "   # ", "  #  ", " #   ", "#    ", "#    "}},
  {'"', {"# #  ", "# #  ", "     ", "     ", "     ", "     ", "     "}},
};
// clang-format on

constexpr int kCanvas = 16;
constexpr int kSpriteColumns = 16;

using Canvas = std::array<double, kCanvas * kCanvas>;

// Area-resamples an ink-coverage map (values in [0,1]) into the square canvas:
// height maps to the canvas height, width keeps the aspect and is centered.
Canvas normalize_cell(const std::vector<double>& ink, int w, int h) {
  Canvas out{};
  const double f = static_cast<double>(kCanvas) / h;
  const double fx = std::min(f, static_cast<double>(kCanvas) / w);
  const double off = (kCanvas - w * fx) / 2.0;
  for (int j = 0; j < h; ++j) {
    const double y0 = j * f;
    const double y1 = (j + 1) * f;
    for (int i = 0; i < w; ++i) {
      const double v = ink[static_cast<std::size_t>(j) * w + i];
      if (v == 0.0) continue;
      const double x0 = off + i * fx;
      const double x1 = off + (i + 1) * fx;
      for (int cy = static_cast<int>(y0); cy < kCanvas && cy < y1; ++cy) {
        const double oy = std::min<double>(cy + 1, y1) - std::max<double>(cy, y0);
        if (oy <= 0) continue;
        for (int cx = static_cast<int>(x0); cx < kCanvas && cx < x1; ++cx) {
          const double ox = std::min<double>(cx + 1, x1) - std::max<double>(cx, x0);
          if (ox > 0) out[static_cast<std::size_t>(cy) * kCanvas + cx] += v * ox * oy;
        }
      }
    }
  }
  return out;
}

double ncc(const Canvas& a, const Canvas& b) {
  double ma = 0, mb = 0;
  for (int i = 0; i < kCanvas * kCanvas; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= kCanvas * kCanvas;
  mb /= kCanvas * kCanvas;
  double sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < kCanvas * kCanvas; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 1e-12 || sbb <= 1e-12) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

struct GlyphTemplate {
  char c;
  Canvas canvas;
};

std::vector<GlyphTemplate> build_templates(const GlyphAtlas& atlas) {
  std::vector<GlyphTemplate> out;
  for (const auto& [c, g] : atlas.glyphs()) {
    int lo = g.width, hi = -1;
    for (int x = 0; x < g.width; ++x)
      for (int y = 0; y < g.height; ++y)
        if (g.at(x, y)) {
          lo = std::min(lo, x);
          hi = std::max(hi, x);
        }
    if (hi < lo) continue;
    const int w = hi - lo + 1;
    std::vector<double> ink(static_cast<std::size_t>(w) * g.height);
    for (int y = 0; y < g.height; ++y)
      for (int x = 0; x < w; ++x) ink[static_cast<std::size_t>(y) * w + x] = g.at(lo + x, y) ? 1.0 : 0.0;
    out.push_back({c, normalize_cell(ink, w, g.height)});
  }
  return out;
}

}  // namespace

GlyphAtlas::GlyphAtlas(std::map<char, Glyph> glyphs) : glyphs_(std::move(glyphs)) {
  for (const auto& [c, g] : glyphs_) {
    if (g.width < 1 || g.height < 1 || g.bits.size() != static_cast<std::size_t>(g.width) * g.height) {
      throw ConfigError(std::string("glyph atlas: malformed glyph '") + c + "'");
    }
  }
}

const GlyphAtlas& GlyphAtlas::builtin() {
  static const GlyphAtlas atlas = [] {
    std::map<char, Glyph> glyphs;
    for (const auto& def : kFont) {
      Glyph g;
      g.bits.resize(kCellWidth * kCellHeight);
      for (int y = 0; y < kCellHeight; ++y)
        for (int x = 0; x < kCellWidth; ++x) g.bits[y * kCellWidth + x] = def.rows[y][x] == '#';
      glyphs.emplace(def.c, std::move(g));
    }
    return GlyphAtlas(std::move(glyphs));
  }();
  return atlas;
}

const Glyph& GlyphAtlas::glyph(char c) const {
  const auto it = glyphs_.find(c);
  if (it == glyphs_.end()) throw ConfigError(std::string("glyph atlas has no character '") + c + "'");
  return it->second;
}

void GlyphAtlas::save(const std::filesystem::path& png_path, const std::filesystem::path& json_path) const {
  const int rows = static_cast<int>((glyphs_.size() + kSpriteColumns - 1) / kSpriteColumns);
  const int pitch_x = kCellWidth + 1;
  const int pitch_y = kCellHeight + 1;
  GrayRaster sprite(std::max(1, kSpriteColumns * pitch_x), std::max(1, rows * pitch_y), 255);
  nlohmann::json index;
  index["cell_width"] = kCellWidth;
  index["cell_height"] = kCellHeight;
  int i = 0;
  for (const auto& [c, g] : glyphs_) {
    const int ox = (i % kSpriteColumns) * pitch_x;
    const int oy = (i / kSpriteColumns) * pitch_y;
    for (int y = 0; y < g.height; ++y)
      for (int x = 0; x < g.width; ++x)
        if (g.at(x, y)) sprite.at(ox + x, oy + y) = 0;
    index["glyphs"][std::string(1, c)] = {{"x", ox}, {"y", oy}, {"w", g.width}, {"h", g.height}};
    ++i;
  }
  save_png(sprite, png_path);
  const std::string text = index.dump(2) + "\n";
  write_file_bytes(json_path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

GlyphAtlas GlyphAtlas::load(const std::filesystem::path& png_path, const std::filesystem::path& json_path) {
  const auto sprite = load_gray_file(png_path);
  const auto bytes = read_file_bytes(json_path);
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("glyph atlas index: " + std::string(e.what()));
  }
  std::map<char, Glyph> glyphs;
  for (const auto& [key, cell] : index.at("glyphs").items()) {
    if (key.size() != 1) throw ConfigError("glyph atlas index: keys must be single characters");
    Glyph g;
    const int x0 = cell.at("x"), y0 = cell.at("y");
    g.width = cell.at("w");
    g.height = cell.at("h");
    if (x0 < 0 || y0 < 0 || x0 + g.width > sprite.width() || y0 + g.height > sprite.height()) {
      throw ConfigError("glyph atlas index: cell outside sprite for '" + key + "'");
    }
    g.bits.resize(static_cast<std::size_t>(g.width) * g.height);
    for (int y = 0; y < g.height; ++y)
      for (int x = 0; x < g.width; ++x) g.bits[static_cast<std::size_t>(y) * g.width + x] = sprite.at(x0 + x, y0 + y) < 128;
    glyphs.emplace(key[0], std::move(g));
  }
  return GlyphAtlas(std::move(glyphs));
}

int glyph_scale_for_width(int sheet_width) {
  return std::max(1, static_cast<int>(std::lround(sheet_width / 2400.0)));
}

int text_width_units(std::string_view text) {
  if (text.empty()) return 0;
  int w = 0;
  for (char c : text) w += (c == ' ' ? GlyphAtlas::kSpaceWidth : GlyphAtlas::kCellWidth);
  return w + GlyphAtlas::kSpacing * static_cast<int>(text.size() - 1);
}

GrayRaster render_text(std::string_view text, int scale, const GlyphAtlas& atlas) {
  if (scale < 1) throw ConfigError("render_text: scale must be >= 1");
  const int w = std::max(1, text_width_units(text)) * scale;
  GrayRaster out(w, GlyphAtlas::kCellHeight * scale, 255);
  int pen = 0;
  for (char c : text) {
    if (c == ' ') {
      pen += GlyphAtlas::kSpaceWidth + GlyphAtlas::kSpacing;
      continue;
    }
    const Glyph& g = atlas.glyph(c);
    for (int y = 0; y < g.height * scale; ++y)
      for (int x = 0; x < g.width * scale; ++x)
        if (g.at(x / scale, y / scale)) out.at(pen * scale + x, y) = 0;
    pen += g.width + GlyphAtlas::kSpacing;
  }
  return out;
}

Recognition glyph_template_recognize(const GrayRaster& crop, const GlyphAtlas& atlas) {
  if (crop.empty()) return {};
  const int w = crop.width();
  const int h = crop.height();
  // Binarize and drop isolated specks.
  std::vector<std::uint8_t> ink(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) ink[static_cast<std::size_t>(y) * w + x] = crop.at(x, y) < 128;
  auto is_ink = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < w && y < h && ink[static_cast<std::size_t>(y) * w + x];
  };
  std::vector<std::uint8_t> clean(ink.size(), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!is_ink(x, y)) continue;
      bool neighbour = false;
      for (int dy = -1; dy <= 1 && !neighbour; ++dy)
        for (int dx = -1; dx <= 1 && !neighbour; ++dx) neighbour = (dx || dy) && is_ink(x + dx, y + dy);
      clean[static_cast<std::size_t>(y) * w + x] = neighbour;
    }

  std::vector<int> row_count(h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) row_count[y] += clean[static_cast<std::size_t>(y) * w + x];
  const int row_min = std::max(1, w / 200);
  int top = -1, bottom = -1;
  for (int y = 0; y < h; ++y)
    if (row_count[y] >= row_min) {
      if (top < 0) top = y;
      bottom = y;
    }
  if (top < 0) return {};
  const int line_h = bottom - top + 1;
  const double unit = line_h / static_cast<double>(GlyphAtlas::kCellHeight);
  const int col_min = std::max(1, static_cast<int>(std::ceil(unit / 2.0)));

  std::vector<int> col_count(w, 0);
  for (int y = top; y <= bottom; ++y)
    for (int x = 0; x < w; ++x) col_count[x] += clean[static_cast<std::size_t>(y) * w + x];

  struct Cell {
    int x0, x1;
  };
  std::vector<Cell> cells;
  for (int x = 0; x < w;) {
    if (col_count[x] < col_min) {
      ++x;
      continue;
    }
    int e = x;
    while (e + 1 < w && col_count[e + 1] >= col_min) ++e;
    if (!cells.empty() && x - cells.back().x1 - 1 < 1.5 * unit) {
      cells.back().x1 = e;  // intra-glyph gap (e.g. the double quote)
    } else {
      cells.push_back({x, e});
    }
    x = e + 1;
  }
  if (cells.empty()) return {};

  std::vector<GlyphTemplate> local;
  const std::vector<GlyphTemplate>* templates = &local;
  if (&atlas == &GlyphAtlas::builtin()) {
    static const std::vector<GlyphTemplate> builtin_templates = build_templates(GlyphAtlas::builtin());
    templates = &builtin_templates;
  } else {
    local = build_templates(atlas);
  }

  Recognition out;
  double total = 0.0;
  int glyphs = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0 && cells[i].x0 - cells[i - 1].x1 - 1 >= 5.5 * unit) out.text.push_back(' ');
    const int cw = cells[i].x1 - cells[i].x0 + 1;
    std::vector<double> cell(static_cast<std::size_t>(cw) * line_h);
    for (int y = 0; y < line_h; ++y)
      for (int x = 0; x < cw; ++x) {
        cell[static_cast<std::size_t>(y) * cw + x] = clean[static_cast<std::size_t>(top + y) * w + cells[i].x0 + x];
      }
    const Canvas c = normalize_cell(cell, cw, line_h);
    double best = -2.0;
    char best_c = '?';
    for (const auto& t : *templates) {
      const double s = ncc(c, t.canvas);
      if (s > best) {
        best = s;
        best_c = t.c;
      }
    }
    out.text.push_back(best_c);
    total += std::clamp(best, 0.0, 1.0);
    ++glyphs;
  }
  out.confidence = glyphs ? total / glyphs : 0.0;
  return out;
}

}  // namespace pidparse
