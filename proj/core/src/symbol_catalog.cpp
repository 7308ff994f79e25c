#include "pidparse/symbol_catalog.hpp"

#include <cmath>

#include "pidparse/draw.hpp"
#include "pidparse/error.hpp"
#include "pidparse/glyphs.hpp"

namespace pidparse {

namespace {

constexpr double kComplexStroke = 0.035;
constexpr double kBasicStroke = 0.014;

// Complex symbol = bowtie body + actuator (a) + center feature (b); class = 1 + 5a + b.
void draw_complex(GrayRaster& r, int class_id, double s) {
  const double t = std::max(1.0, kComplexStroke * s);
  const int a = (class_id - 1) / 5;
  const int b = (class_id - 1) % 5;
  auto seg = [&](double x0, double y0, double x1, double y1, double th) {
    draw_segment(r, x0 * s, y0 * s, x1 * s, y1 * s, th);
  };
  // Two triangles meeting at the center.
  seg(0.04, 0.30, 0.04, 0.70, t);
  seg(0.04, 0.30, 0.50, 0.50, t);
  seg(0.04, 0.70, 0.50, 0.50, t);
  seg(0.96, 0.30, 0.96, 0.70, t);
  seg(0.96, 0.30, 0.50, 0.50, t);
  seg(0.96, 0.70, 0.50, 0.50, t);

  switch (a) {
    case 1:  // T handle
      seg(0.50, 0.50, 0.50, 0.16, t);
      seg(0.30, 0.16, 0.70, 0.16, t);
      break;
    case 2:  // dome
      seg(0.50, 0.50, 0.50, 0.26, t);
      seg(0.32, 0.26, 0.68, 0.26, t);
      draw_upper_arc(r, 0.50 * s, 0.26 * s, 0.18 * s, t);
      break;
    case 3:  // open box
      seg(0.50, 0.50, 0.50, 0.30, t);
      draw_box(r, 0.37 * s, 0.06 * s, 0.63 * s, 0.30 * s, t);
      break;
    case 4:  // solid box
      seg(0.50, 0.50, 0.50, 0.30, t);
      fill_box(r, 0.37 * s, 0.06 * s, 0.63 * s, 0.30 * s);
      break;
    default:
      break;
  }
  switch (b) {
    case 1:
      fill_circle(r, 0.5 * s, 0.5 * s, 0.08 * s);
      break;
    case 2:
      draw_circle(r, 0.5 * s, 0.5 * s, 0.12 * s, t);
      break;
    case 3:
      seg(0.50, 0.34, 0.50, 0.66, 2.2 * t);
      break;
    case 4:
      seg(0.40, 0.40, 0.60, 0.60, t);
      seg(0.40, 0.60, 0.60, 0.40, t);
      break;
    default:
      break;
  }
}

void draw_basic(GrayRaster& r, int class_id, double s) {
  const double t = std::max(1.0, kBasicStroke * s);
  switch (class_id) {
    case 26:
    case 27:
      draw_circle(r, 0.5 * s, 0.5 * s, 0.46 * s, t);
      break;
    case 28:
      draw_circle(r, 0.5 * s, 0.5 * s, 0.46 * s, t);
      draw_segment(r, 0.04 * s, 0.5 * s, 0.96 * s, 0.5 * s, t);
      break;
    case 29:
    case 30:
      draw_box(r, 0.08 * s, 0.26 * s, 0.92 * s, 0.74 * s, t);
      break;
    case 31:
      draw_box(r, 0.08 * s, 0.08 * s, 0.92 * s, 0.92 * s, t);
      draw_circle(r, 0.5 * s, 0.5 * s, 0.42 * s, t);
      break;
    case 32:
      draw_circle(r, 0.5 * s, 0.30 * s, 0.20 * s, t);
      draw_box(r, 0.22 * s, 0.50 * s, 0.78 * s, 0.90 * s, t);
      break;
    default:
      break;
  }
}

}  // namespace

std::string class_name(int class_id) {
  if (class_id == kOthers) return "others";
  if (!is_valid_class(class_id)) throw ConfigError("invalid symbol class " + std::to_string(class_id));
  return "symbol_" + std::to_string(class_id);
}

int class_from_name(const std::string& name) {
  if (name == "others" || name == "0") return kOthers;
  std::string digits = name.rfind("symbol_", 0) == 0 ? name.substr(7) : name;
  try {
    std::size_t used = 0;
    const int c = std::stoi(digits, &used);
    if (used == digits.size() && (is_valid_class(c) || c == kOthers)) return c;
  } catch (const std::exception&) {
  }
  throw ConfigError("unknown symbol class '" + name + "'");
}

int complex_symbol_size(int sheet_width) { return std::max(16, static_cast<int>(std::lround(0.012 * sheet_width))); }
int basic_symbol_size(int sheet_width) { return std::max(40, static_cast<int>(std::lround(0.03 * sheet_width))); }

double symbol_stroke(int class_id, int size) {
  return std::max(1.0, (is_complex_class(class_id) ? kComplexStroke : kBasicStroke) * size);
}

std::optional<std::pair<double, double>> embedded_text_center(int class_id, int size) {
  const double s = size;
  switch (class_id) {
    case 26:
    case 27:
    case 29:
    case 31:
      return std::pair{0.5 * s, 0.5 * s};
    case 28:
      return std::pair{0.5 * s, 0.34 * s};
    default:
      return std::nullopt;
  }
}

std::string canonical_tag(int class_id) {
  switch (class_id) {
    case 26: return "PI 101";
    case 27: return "TT 2";
    case 28: return "FC 3";
    case 29: return "TK 4";
    case 31: return "HS 5";
    default: return "";
  }
}

GrayRaster render_symbol(int class_id, int size, int rotation_deg, bool canonical_text) {
  if (!is_valid_class(class_id)) throw ConfigError("render_symbol: invalid class " + std::to_string(class_id));
  if (size < 8) throw ConfigError("render_symbol: size must be >= 8");
  if (rotation_deg % 90 != 0) throw ConfigError("render_symbol: rotation must be a multiple of 90");
  GrayRaster r(size, size, 255);
  if (is_complex_class(class_id)) {
    draw_complex(r, class_id, size);
  } else {
    draw_basic(r, class_id, size);
    const auto center = embedded_text_center(class_id, size);
    if (canonical_text && center) {
      const int scale = std::max(1, static_cast<int>(std::lround(size * 0.098 / GlyphAtlas::kCellHeight)));
      const GrayRaster text = render_text(canonical_tag(class_id), scale);
      paste_ink(r, text, static_cast<int>(std::lround(center->first - text.width() / 2.0)),
                static_cast<int>(std::lround(center->second - text.height() / 2.0)));
    }
  }
  const int turns = ((rotation_deg / 90) % 4 + 4) % 4;
  return turns ? rotate_cw(r, turns) : r;
}

}  // namespace pidparse
