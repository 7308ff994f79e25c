#pragma once

#include <vector>

#include "pidparse/raster.hpp"

namespace pidparse {

/// Horizontal foreground run [x0, x1] (inclusive) on row y.
struct Run {
  int y = 0;
  int x0 = 0;
  int x1 = 0;
};

struct Component {
  std::vector<Run> runs;  // raster order
  Rect bbox;
  std::size_t pixel_count = 0;
  double sum_x = 0.0;
  double sum_y = 0.0;

  [[nodiscard]] double centroid_x() const { return pixel_count ? sum_x / pixel_count : 0.0; }
  [[nodiscard]] double centroid_y() const { return pixel_count ? sum_y / pixel_count : 0.0; }
  [[nodiscard]] std::vector<Point> pixels() const;
  /// Run endpoints; their convex hull equals the hull of all pixels.
  [[nodiscard]] std::vector<Point> run_endpoints() const;
};

enum class Connectivity { four, eight };

/// Connected foreground components, ordered by their first pixel in raster order.
std::vector<Component> connected_components(const BinaryRaster& a,
                                             Connectivity connectivity = Connectivity::eight);

/// One point set per 8-connected component, pixels in raster order.
std::vector<std::vector<Point>> contours(const BinaryRaster& a);

}  // namespace pidparse
