#include "pidparse/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <unordered_map>

namespace pidparse {

namespace {

// Uniform grid with cell size eps; neighbours live in the 3x3 cell block.
class Grid {
 public:
  Grid(std::span<const Vec2> pts, double eps) : pts_(pts), eps_(eps) {
    for (std::size_t i = 0; i < pts.size(); ++i) cells_[key(cell(pts[i].x), cell(pts[i].y))].push_back(i);
  }

  std::vector<std::size_t> neighbours(std::size_t i) const {
    std::vector<std::size_t> out;
    const long long cx = cell(pts_[i].x);
    const long long cy = cell(pts_[i].y);
    const double eps2 = eps_ * eps_;
    for (long long dy = -1; dy <= 1; ++dy) {
      for (long long dx = -1; dx <= 1; ++dx) {
        auto it = cells_.find(key(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (std::size_t j : it->second) {
          const double ex = pts_[j].x - pts_[i].x;
          const double ey = pts_[j].y - pts_[i].y;
          if (ex * ex + ey * ey < eps2) out.push_back(j);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  long long cell(double v) const { return static_cast<long long>(std::floor(v / eps_)); }
  static std::uint64_t key(long long x, long long y) {
    return (static_cast<std::uint64_t>(x) << 32) ^ (static_cast<std::uint64_t>(y) & 0xffffffffULL);
  }

  std::span<const Vec2> pts_;
  double eps_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace

std::vector<int> dbscan(std::span<const Vec2> points, double eps, int min_pts) {
  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  std::vector<int> labels(points.size(), kUnvisited);
  if (points.empty()) return labels;
  if (eps <= 0.0) {
    std::fill(labels.begin(), labels.end(), kNoise);
    return labels;
  }
  const Grid grid(points, eps);
  int next = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (labels[i] != kUnvisited) continue;
    auto seeds = grid.neighbours(i);
    if (static_cast<int>(seeds.size()) < min_pts) {
      labels[i] = kNoise;
      continue;
    }
    const int id = next++;
    labels[i] = id;
    std::deque<std::size_t> queue(seeds.begin(), seeds.end());
    while (!queue.empty()) {
      const std::size_t j = queue.front();
      queue.pop_front();
      if (labels[j] == kNoise) labels[j] = id;
      if (labels[j] != kUnvisited) continue;
      labels[j] = id;
      auto more = grid.neighbours(j);
      if (static_cast<int>(more.size()) >= min_pts) queue.insert(queue.end(), more.begin(), more.end());
    }
  }
  return labels;
}

}  // namespace pidparse
