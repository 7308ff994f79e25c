#include "pidparse/hull.hpp"

#include <algorithm>

#include "pidparse/error.hpp"

namespace pidparse {

long long cross(Point o, Point a, Point b) {
  return static_cast<long long>(a.x - o.x) * (b.y - o.y) - static_cast<long long>(a.y - o.y) * (b.x - o.x);
}

std::vector<Point> convex_hull(std::span<const Point> points) {
  std::vector<Point> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) return pts;

  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return hull;
}

std::pair<Point, Point> extreme_points_along(std::span<const Point> hull, Orientation orientation) {
  if (hull.empty()) throw Error("extreme_points_along needs at least one point");
  const bool horiz = orientation == Orientation::horizontal;
  auto axis = [horiz](const Point& p) { return horiz ? p.x : p.y; };
  auto perp = [horiz](const Point& p) { return horiz ? p.y : p.x; };
  Point lo = hull.front();
  Point hi = hull.front();
  for (const Point& p : hull) {
    if (axis(p) < axis(lo) || (axis(p) == axis(lo) && perp(p) < perp(lo))) lo = p;
    if (axis(p) > axis(hi) || (axis(p) == axis(hi) && perp(p) < perp(hi))) hi = p;
  }
  return {lo, hi};
}

}  // namespace pidparse
