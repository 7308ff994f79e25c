#pragma once

#include <span>
#include <vector>

namespace pidparse {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Density clustering. A point is a core point when at least `min_pts` points
/// (itself included) lie strictly closer than `eps`. Returns one label per
/// point: clusters are numbered 0.. in order of their first point; noise is -1.
std::vector<int> dbscan(std::span<const Vec2> points, double eps, int min_pts);

}  // namespace pidparse
