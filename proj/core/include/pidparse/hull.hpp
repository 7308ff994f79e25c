#pragma once

#include <span>
#include <utility>
#include <vector>

#include "pidparse/types.hpp"

namespace pidparse {

/// Convex hull vertices in counter-clockwise order (positive signed area with
/// x right, y up), starting from the smallest (x, y). Collinear points are
/// dropped; an all-collinear input yields its two extreme points and a single
/// distinct point yields itself. Empty input yields an empty hull.
std::vector<Point> convex_hull(std::span<const Point> points);

/// The hull points with minimum and maximum projection on the orientation
/// axis. Ties go to the smaller perpendicular coordinate.
std::pair<Point, Point> extreme_points_along(std::span<const Point> hull, Orientation orientation);

/// Twice the signed area of triangle (o, a, b).
long long cross(Point o, Point a, Point b);

}  // namespace pidparse
