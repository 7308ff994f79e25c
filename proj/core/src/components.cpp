#include "pidparse/components.hpp"

#include <numeric>

namespace pidparse {

namespace {

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  // The smaller root wins so labels follow raster order.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) parent_[b] = a;
    else parent_[a] = b;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<Point> Component::pixels() const {
  std::vector<Point> out;
  out.reserve(pixel_count);
  for (const auto& r : runs) {
    for (int x = r.x0; x <= r.x1; ++x) out.push_back({x, r.y});
  }
  return out;
}

std::vector<Point> Component::run_endpoints() const {
  std::vector<Point> out;
  out.reserve(runs.size() * 2);
  for (const auto& r : runs) {
    out.push_back({r.x0, r.y});
    if (r.x1 != r.x0) out.push_back({r.x1, r.y});
  }
  return out;
}

std::vector<Component> connected_components(const BinaryRaster& a, Connectivity connectivity) {
  std::vector<Run> runs;
  std::vector<std::size_t> row_start(static_cast<std::size_t>(a.height()) + 1, 0);
  for (int y = 0; y < a.height(); ++y) {
    row_start[y] = runs.size();
    const auto* row = a.row_ptr(y);
    int x = 0;
    while (x < a.width()) {
      if (!row[x]) {
        ++x;
        continue;
      }
      const int s = x;
      while (x < a.width() && row[x]) ++x;
      runs.push_back({y, s, x - 1});
    }
  }
  row_start[a.height()] = runs.size();

  DisjointSet sets(runs.size());
  const int reach = connectivity == Connectivity::eight ? 1 : 0;
  for (int y = 1; y < a.height(); ++y) {
    std::size_t i = row_start[y - 1];
    const std::size_t i_end = row_start[y];
    for (std::size_t j = row_start[y]; j < row_start[y + 1]; ++j) {
      const Run& cur = runs[j];
      while (i < i_end && runs[i].x1 + reach < cur.x0) ++i;
      for (std::size_t k = i; k < i_end && runs[k].x0 <= cur.x1 + reach; ++k) sets.unite(j, k);
    }
  }

  std::vector<Component> out;
  std::vector<std::size_t> slot(runs.size(), static_cast<std::size_t>(-1));
  for (std::size_t j = 0; j < runs.size(); ++j) {
    const std::size_t root = sets.find(j);
    if (slot[root] == static_cast<std::size_t>(-1)) {
      slot[root] = out.size();
      out.emplace_back();
    }
    Component& c = out[slot[root]];
    const Run& r = runs[j];
    const Rect rb{r.x0, r.y, r.x1 - r.x0 + 1, 1};
    c.bbox = c.runs.empty() ? rb : unite(c.bbox, rb);
    c.runs.push_back(r);
    const auto n = static_cast<std::size_t>(r.x1 - r.x0 + 1);
    c.pixel_count += n;
    c.sum_x += static_cast<double>(r.x0 + r.x1) * static_cast<double>(n) / 2.0;
    c.sum_y += static_cast<double>(r.y) * static_cast<double>(n);
  }
  return out;
}

std::vector<std::vector<Point>> contours(const BinaryRaster& a) {
  std::vector<std::vector<Point>> out;
  for (const auto& c : connected_components(a, Connectivity::eight)) out.push_back(c.pixels());
  return out;
}

}  // namespace pidparse
