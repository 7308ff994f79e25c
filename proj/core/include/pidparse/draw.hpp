#pragma once

#include "pidparse/raster.hpp"

namespace pidparse {

// Ink rasterization on a GrayRaster. Coordinates are continuous; pixel (x, y)
// has its center at (x + 0.5, y + 0.5) and is inked when its center falls in
// the primitive. Drawing only ever darkens (min with `value`).

void fill_rect(GrayRaster& r, const Rect& box, std::uint8_t value = 0);
void draw_segment(GrayRaster& r, double x0, double y0, double x1, double y1, double thickness,
                  std::uint8_t value = 0);
void draw_circle(GrayRaster& r, double cx, double cy, double radius, double thickness, std::uint8_t value = 0);
/// Only the part of the ring with y <= cy (the upper half).
void draw_upper_arc(GrayRaster& r, double cx, double cy, double radius, double thickness,
                    std::uint8_t value = 0);
void fill_circle(GrayRaster& r, double cx, double cy, double radius, std::uint8_t value = 0);
void fill_box(GrayRaster& r, double x0, double y0, double x1, double y1, std::uint8_t value = 0);
void draw_box(GrayRaster& r, double x0, double y0, double x1, double y1, double thickness,
              std::uint8_t value = 0);

/// Darkens dst with src placed at (x, y); pixels outside dst are ignored.
void paste_ink(GrayRaster& dst, const GrayRaster& src, int x, int y);

/// Tight bounds of pixels darker than 128; empty Rect when there are none.
Rect ink_bounds(const GrayRaster& r);

}  // namespace pidparse
