#pragma once

#include "pidparse/raster.hpp"

namespace pidparse {

/// One-pixel-wide line structuring element. Anchored at length/2, so the active
/// offsets along the orientation axis are [-length/2, length-1-length/2].
struct LineKernel {
  Orientation orientation = Orientation::horizontal;
  int length = 3;

  [[nodiscard]] int before() const { return length / 2; }
  [[nodiscard]] int after() const { return length - 1 - length / 2; }
};

/// out(p) = min over kernel offsets o of a(p + o); out-of-bounds reads are background.
BinaryRaster erode(const BinaryRaster& a, const LineKernel& k);

/// out(p) = max over kernel offsets o of a(p - o). The reflection makes
/// erode-then-dilate anti-extensive for even lengths as well.
BinaryRaster dilate(const BinaryRaster& a, const LineKernel& k);

/// Erosion followed by dilation with the same element: keeps runs of at least
/// `k.length` pixels along the kernel axis, unchanged.
BinaryRaster open(const BinaryRaster& a, const LineKernel& k);

/// Dilation by a (2r+1)x(2r+1) square.
BinaryRaster dilate_square(const BinaryRaster& a, int radius);

}  // namespace pidparse
