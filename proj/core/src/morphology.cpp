#include "pidparse/morphology.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include "pidparse/error.hpp"

namespace pidparse {

namespace {

void check_kernel(const LineKernel& k) {
  if (k.length < 1) throw Error("line kernel length must be >= 1");
}

BinaryRaster erode_horizontal(const BinaryRaster& a, int before, int after) {
  BinaryRaster out(a.width(), a.height());
  const int w = a.width();
  for (int y = 0; y < a.height(); ++y) {
    const auto* src = a.row_ptr(y);
    auto* dst = out.row_ptr(y);
    int x = 0;
    while (x < w) {
      if (!src[x]) {
        ++x;
        continue;
      }
      const int s = x;
      while (x < w && src[x]) ++x;
      const int e = x - 1;
      for (int i = s + before; i <= e - after; ++i) dst[i] = 1;
    }
  }
  return out;
}

BinaryRaster dilate_horizontal(const BinaryRaster& a, int before, int after) {
  BinaryRaster out(a.width(), a.height());
  const int w = a.width();
  for (int y = 0; y < a.height(); ++y) {
    const auto* src = a.row_ptr(y);
    auto* dst = out.row_ptr(y);
    int x = 0;
    while (x < w) {
      if (!src[x]) {
        ++x;
        continue;
      }
      const int s = x;
      while (x < w && src[x]) ++x;
      const int e = x - 1;
      const int lo = std::max(0, s - before);
      const int hi = std::min(w - 1, e + after);
      std::fill(dst + lo, dst + hi + 1, std::uint8_t{1});
    }
  }
  return out;
}

BinaryRaster erode_vertical(const BinaryRaster& a, int before, int after) {
  BinaryRaster out(a.width(), a.height());
  const int w = a.width();
  const int len = before + after + 1;
  std::vector<int> run(static_cast<std::size_t>(w), 0);
  for (int r = 0; r < a.height(); ++r) {
    const auto* src = a.row_ptr(r);
    const int y = r - after;
    auto* dst = y >= 0 ? out.row_ptr(y) : nullptr;
    for (int x = 0; x < w; ++x) {
      run[x] = src[x] ? run[x] + 1 : 0;
      if (dst && run[x] >= len) dst[x] = 1;
    }
  }
  return out;
}

BinaryRaster dilate_vertical(const BinaryRaster& a, int before, int after) {
  BinaryRaster out(a.width(), a.height());
  const int w = a.width();
  const int h = a.height();
  constexpr int kNever = std::numeric_limits<int>::min() / 2;
  std::vector<int> last(static_cast<std::size_t>(w), kNever);
  for (int r = 0; r < h + before; ++r) {
    if (r < h) {
      const auto* src = a.row_ptr(r);
      for (int x = 0; x < w; ++x) {
        if (src[x]) last[x] = r;
      }
    }
    const int y = r - before;
    if (y < 0) continue;
    auto* dst = out.row_ptr(y);
    const int lowest = y - after;
    for (int x = 0; x < w; ++x) {
      if (last[x] >= lowest) dst[x] = 1;
    }
  }
  return out;
}

}  // namespace

BinaryRaster erode(const BinaryRaster& a, const LineKernel& k) {
  check_kernel(k);
  return k.orientation == Orientation::horizontal ? erode_horizontal(a, k.before(), k.after())
                                                  : erode_vertical(a, k.before(), k.after());
}

BinaryRaster dilate(const BinaryRaster& a, const LineKernel& k) {
  check_kernel(k);
  return k.orientation == Orientation::horizontal ? dilate_horizontal(a, k.before(), k.after())
                                                  : dilate_vertical(a, k.before(), k.after());
}

BinaryRaster open(const BinaryRaster& a, const LineKernel& k) { return dilate(erode(a, k), k); }

BinaryRaster dilate_square(const BinaryRaster& a, int radius) {
  if (radius <= 0) return a;
  const int len = 2 * radius + 1;
  return dilate(dilate(a, {Orientation::horizontal, len}), {Orientation::vertical, len});
}

}  // namespace pidparse
