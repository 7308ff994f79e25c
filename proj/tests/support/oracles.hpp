#pragma once

// Brute-force reference implementations used only by tests.

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "pidparse/morphology.hpp"
#include "pidparse/raster.hpp"

namespace oracle {

using pidparse::BinaryRaster;
using pidparse::LineKernel;
using pidparse::Orientation;
using pidparse::Point;

inline BinaryRaster min_filter(const BinaryRaster& a, const LineKernel& k) {
  BinaryRaster out(a.width(), a.height());
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      bool v = true;
      for (int o = -k.before(); o <= k.after(); ++o) {
        const int xx = k.orientation == Orientation::horizontal ? x + o : x;
        const int yy = k.orientation == Orientation::horizontal ? y : y + o;
        v = v && a.get(xx, yy);
      }
      out.set(x, y, v);
    }
  }
  return out;
}

// Max over the reflected element, matching the library's dilation convention.
inline BinaryRaster max_filter(const BinaryRaster& a, const LineKernel& k) {
  BinaryRaster out(a.width(), a.height());
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      bool v = false;
      for (int o = -k.before(); o <= k.after(); ++o) {
        const int xx = k.orientation == Orientation::horizontal ? x - o : x;
        const int yy = k.orientation == Orientation::horizontal ? y : y - o;
        v = v || a.get(xx, yy);
      }
      out.set(x, y, v);
    }
  }
  return out;
}

inline long long cross3(Point o, Point a, Point b) {
  return static_cast<long long>(a.x - o.x) * (b.y - o.y) -
         static_cast<long long>(a.y - o.y) * (b.x - o.x);
}

// True when p lies strictly inside triangle (a, b, c) or on it without being a
// hull-defining extreme (handled by the caller's collinear rule).
inline bool strictly_inside(Point p, Point a, Point b, Point c) {
  const long long d1 = cross3(a, b, p);
  const long long d2 = cross3(b, c, p);
  const long long d3 = cross3(c, a, p);
  return (d1 > 0 && d2 > 0 && d3 > 0) || (d1 < 0 && d2 < 0 && d3 < 0);
}

// Point lies on the closed segment ab strictly between its endpoints.
inline bool strictly_between(Point p, Point a, Point b) {
  if (cross3(a, b, p) != 0) return false;
  if (p == a || p == b) return false;
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

// Hull vertex set by the O(n^4) rule: a point is a vertex iff no triangle of
// other points contains it strictly and it is not strictly between two others.
inline std::set<Point> hull_vertex_set(const std::vector<Point>& in) {
  std::vector<Point> pts(in.begin(), in.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::set<Point> out;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    bool vertex = true;
    for (std::size_t a = 0; a < n && vertex; ++a) {
      if (a == i) continue;
      for (std::size_t b = a + 1; b < n && vertex; ++b) {
        if (b == i) continue;
        if (strictly_between(pts[i], pts[a], pts[b])) vertex = false;
        for (std::size_t c = b + 1; c < n && vertex; ++c) {
          if (c == i) continue;
          if (strictly_inside(pts[i], pts[a], pts[b], pts[c])) vertex = false;
        }
      }
    }
    if (vertex) out.insert(pts[i]);
  }
  return out;
}

// 8-connected flood fill component sizes, sorted ascending.
inline std::vector<std::size_t> flood_fill_sizes(const BinaryRaster& a) {
  std::vector<std::uint8_t> seen(a.bits().size(), 0);
  std::vector<std::size_t> sizes;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (!a.at(x, y) || seen[static_cast<std::size_t>(y) * a.width() + x]) continue;
      std::size_t n = 0;
      std::vector<Point> stack{{x, y}};
      seen[static_cast<std::size_t>(y) * a.width() + x] = 1;
      while (!stack.empty()) {
        const Point p = stack.back();
        stack.pop_back();
        ++n;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = p.x + dx;
            const int ny = p.y + dy;
            if (!a.get(nx, ny)) continue;
            auto& s = seen[static_cast<std::size_t>(ny) * a.width() + nx];
            if (s) continue;
            s = 1;
            stack.push_back({nx, ny});
          }
        }
      }
      sizes.push_back(n);
    }
  }
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

}  // namespace oracle
