#include "pidparse/types.hpp"

#include <cstdlib>

#include "pidparse/error.hpp"

namespace pidparse {

std::string_view to_string(Orientation o) {
  return o == Orientation::horizontal ? "horizontal" : "vertical";
}

std::string_view to_string(LineStyle s) {
  return s == LineStyle::solid ? "solid" : "dashed";
}

Orientation orientation_from_string(std::string_view s) {
  if (s == "horizontal") return Orientation::horizontal;
  if (s == "vertical") return Orientation::vertical;
  throw ConfigError("unknown orientation: " + std::string(s));
}

LineStyle line_style_from_string(std::string_view s) {
  if (s == "solid") return LineStyle::solid;
  if (s == "dashed") return LineStyle::dashed;
  throw ConfigError("unknown line style: " + std::string(s));
}

Rect intersect(const Rect& a, const Rect& b) {
  const int x0 = std::max(a.x, b.x);
  const int y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.right(), b.right());
  const int y1 = std::min(a.bottom(), b.bottom());
  if (x1 <= x0 || y1 <= y0) return {x0, y0, 0, 0};
  return {x0, y0, x1 - x0, y1 - y0};
}

Rect unite(const Rect& a, const Rect& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  const int x0 = std::min(a.x, b.x);
  const int y0 = std::min(a.y, b.y);
  const int x1 = std::max(a.right(), b.right());
  const int y1 = std::max(a.bottom(), b.bottom());
  return {x0, y0, x1 - x0, y1 - y0};
}

double iou(const Rect& a, const Rect& b) {
  const long long inter = intersect(a, b).area();
  if (inter == 0) return 0.0;
  const long long uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

Rect rect_from_corners(Point a, Point b) {
  const int x0 = std::min(a.x, b.x);
  const int y0 = std::min(a.y, b.y);
  return {x0, y0, std::abs(a.x - b.x) + 1, std::abs(a.y - b.y) + 1};
}

}  // namespace pidparse
