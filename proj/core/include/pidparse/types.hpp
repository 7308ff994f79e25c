#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace pidparse {

struct Point {
  int x = 0;
  int y = 0;

  friend auto operator<=>(const Point&, const Point&) = default;
};

enum class Orientation { horizontal, vertical };
enum class LineStyle { solid, dashed };

std::string_view to_string(Orientation o);
std::string_view to_string(LineStyle s);
Orientation orientation_from_string(std::string_view s);
LineStyle line_style_from_string(std::string_view s);

/// Axis-aligned pixel rectangle; covers columns [x, x+w) and rows [y, y+h).
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  friend bool operator==(const Rect&, const Rect&) = default;

  [[nodiscard]] int right() const { return x + w; }
  [[nodiscard]] int bottom() const { return y + h; }
  [[nodiscard]] long long area() const {
    return static_cast<long long>(std::max(w, 0)) * std::max(h, 0);
  }
  [[nodiscard]] bool empty() const { return w <= 0 || h <= 0; }
  [[nodiscard]] double center_x() const { return x + w / 2.0; }
  [[nodiscard]] double center_y() const { return y + h / 2.0; }
  [[nodiscard]] bool contains(double px, double py) const {
    return px >= x && px < x + w && py >= y && py < y + h;
  }
  [[nodiscard]] Rect expanded(int margin) const {
    return {x - margin, y - margin, w + 2 * margin, h + 2 * margin};
  }
};

Rect intersect(const Rect& a, const Rect& b);
Rect unite(const Rect& a, const Rect& b);
double iou(const Rect& a, const Rect& b);

/// Smallest rectangle containing both points (inclusive pixel coordinates).
Rect rect_from_corners(Point a, Point b);

}  // namespace pidparse
