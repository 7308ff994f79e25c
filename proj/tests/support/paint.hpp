#pragma once

// Small drawing helpers shared by tests.

#include <random>

#include "pidparse/raster.hpp"

namespace paint {

inline void paste_ink(pidparse::GrayRaster& dst, const pidparse::GrayRaster& src, int x0, int y0) {
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x)
      if (dst.in_bounds(x0 + x, y0 + y)) dst.at(x0 + x, y0 + y) = std::min(dst.at(x0 + x, y0 + y), src.at(x, y));
}

inline void salt_pepper(pidparse::GrayRaster& r, double rate, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  for (auto& v : r.data()) {
    const double p = u(rng);
    if (p < rate / 2) v = 0;
    else if (p < rate) v = 255;
  }
}

inline pidparse::Rect ink_bounds(const pidparse::GrayRaster& r) {
  int x0 = r.width(), y0 = r.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < r.height(); ++y)
    for (int x = 0; x < r.width(); ++x)
      if (r.at(x, y) < 128) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) return {};
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

}  // namespace paint
