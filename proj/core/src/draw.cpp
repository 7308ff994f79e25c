#include "pidparse/draw.hpp"

#include <algorithm>
#include <cmath>

namespace pidparse {

namespace {

void darken(GrayRaster& r, int x, int y, std::uint8_t value) {
  if (r.in_bounds(x, y)) r.at(x, y) = std::min(r.at(x, y), value);
}

struct Span {
  int x0, x1, y0, y1;
};

Span pixel_span(const GrayRaster& r, double x0, double y0, double x1, double y1) {
  return {std::max(0, static_cast<int>(std::floor(x0 - 0.5))), std::min(r.width() - 1, static_cast<int>(std::ceil(x1))),
          std::max(0, static_cast<int>(std::floor(y0 - 0.5))), std::min(r.height() - 1, static_cast<int>(std::ceil(y1)))};
}

}  // namespace

void fill_rect(GrayRaster& r, const Rect& box, std::uint8_t value) {
  const Rect c = intersect(box, {0, 0, r.width(), r.height()});
  for (int y = c.y; y < c.bottom(); ++y)
    for (int x = c.x; x < c.right(); ++x) darken(r, x, y, value);
}

void draw_segment(GrayRaster& r, double x0, double y0, double x1, double y1, double thickness,
                  std::uint8_t value) {
  const double h = thickness / 2.0;
  const Span s = pixel_span(r, std::min(x0, x1) - h, std::min(y0, y1) - h, std::max(x0, x1) + h,
                            std::max(y0, y1) + h);
  const double dx = x1 - x0, dy = y1 - y0;
  const double len2 = dx * dx + dy * dy;
  for (int y = s.y0; y <= s.y1; ++y) {
    for (int x = s.x0; x <= s.x1; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      double t = len2 > 0 ? ((px - x0) * dx + (py - y0) * dy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double ex = px - (x0 + t * dx), ey = py - (y0 + t * dy);
      if (ex * ex + ey * ey <= h * h) darken(r, x, y, value);
    }
  }
}

void draw_circle(GrayRaster& r, double cx, double cy, double radius, double thickness, std::uint8_t value) {
  const double h = thickness / 2.0;
  const double outer = radius + h;
  const Span s = pixel_span(r, cx - outer, cy - outer, cx + outer, cy + outer);
  for (int y = s.y0; y <= s.y1; ++y)
    for (int x = s.x0; x <= s.x1; ++x) {
      const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
      if (std::abs(d - radius) <= h) darken(r, x, y, value);
    }
}

void draw_upper_arc(GrayRaster& r, double cx, double cy, double radius, double thickness, std::uint8_t value) {
  const double h = thickness / 2.0;
  const double outer = radius + h;
  const Span s = pixel_span(r, cx - outer, cy - outer, cx + outer, cy);
  for (int y = s.y0; y <= s.y1; ++y)
    for (int x = s.x0; x <= s.x1; ++x) {
      if (y + 0.5 > cy) continue;
      const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
      if (std::abs(d - radius) <= h) darken(r, x, y, value);
    }
}

void fill_circle(GrayRaster& r, double cx, double cy, double radius, std::uint8_t value) {
  const Span s = pixel_span(r, cx - radius, cy - radius, cx + radius, cy + radius);
  for (int y = s.y0; y <= s.y1; ++y)
    for (int x = s.x0; x <= s.x1; ++x)
      if (std::hypot(x + 0.5 - cx, y + 0.5 - cy) <= radius) darken(r, x, y, value);
}

void fill_box(GrayRaster& r, double x0, double y0, double x1, double y1, std::uint8_t value) {
  const Span s = pixel_span(r, x0, y0, x1, y1);
  for (int y = s.y0; y <= s.y1; ++y)
    for (int x = s.x0; x <= s.x1; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      if (px >= x0 && px <= x1 && py >= y0 && py <= y1) darken(r, x, y, value);
    }
}

void draw_box(GrayRaster& r, double x0, double y0, double x1, double y1, double thickness, std::uint8_t value) {
  draw_segment(r, x0, y0, x1, y0, thickness, value);
  draw_segment(r, x1, y0, x1, y1, thickness, value);
  draw_segment(r, x1, y1, x0, y1, thickness, value);
  draw_segment(r, x0, y1, x0, y0, thickness, value);
}

void paste_ink(GrayRaster& dst, const GrayRaster& src, int x0, int y0) {
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x) darken(dst, x0 + x, y0 + y, src.at(x, y));
}

Rect ink_bounds(const GrayRaster& r) {
  int x0 = r.width(), y0 = r.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < r.height(); ++y) {
    const auto row = r.row(y);
    for (int x = 0; x < r.width(); ++x)
      if (row[x] < 128) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = y;
      }
  }
  if (x1 < 0) return {};
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

}  // namespace pidparse
