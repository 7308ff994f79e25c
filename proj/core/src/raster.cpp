#include "pidparse/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <opencv2/imgproc.hpp>

#include "pidparse/error.hpp"

namespace pidparse {

GrayRaster::GrayRaster(int width, int height, std::uint8_t fill)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
  if (width < 1 || height < 1) throw Error("GrayRaster dimensions must be >= 1");
}

GrayRaster::GrayRaster(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) throw Error("GrayRaster dimensions must be >= 1");
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error("GrayRaster data length does not match dimensions");
  }
}

BinaryRaster::BinaryRaster(int width, int height, bool fill)
    : width_(width), height_(height),
      bits_(static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0)),
            fill ? 1 : 0) {}

std::size_t BinaryRaster::count() const {
  return static_cast<std::size_t>(std::count_if(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; }));
}

int otsu_threshold(const GrayRaster& r) {
  std::array<std::uint64_t, 256> hist{};
  for (std::uint8_t v : r.data()) ++hist[v];
  const double total = static_cast<double>(r.data().size());
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += static_cast<double>(i) * static_cast<double>(hist[i]);

  double best = -1.0;
  int best_t = 128;
  double w0 = 0.0;
  double sum0 = 0.0;
  // Class 0 = [0, t), class 1 = [t, 255].
  for (int t = 1; t < 256; ++t) {
    w0 += static_cast<double>(hist[t - 1]);
    sum0 += static_cast<double>(t - 1) * static_cast<double>(hist[t - 1]);
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best < 0.0 ? 128 : best_t;
}

BinaryRaster binarize(const GrayRaster& r, BinarizePolicy policy) {
  const int t = policy.kind == BinarizePolicy::Kind::otsu ? otsu_threshold(r) : policy.threshold;
  BinaryRaster out(r.width(), r.height());
  auto& bits = out.bits();
  const auto& src = r.data();
  for (std::size_t i = 0; i < src.size(); ++i) bits[i] = src[i] < t ? 1 : 0;
  return out;
}

GrayRaster resize(const GrayRaster& r, int width, int height) {
  if (width < 1 || height < 1) throw Error("resize target must be >= 1");
  if (width == r.width() && height == r.height()) return r;
  cv::Mat src(r.height(), r.width(), CV_8UC1, const_cast<std::uint8_t*>(r.data().data()));
  cv::Mat dst;
  cv::resize(src, dst, cv::Size(width, height), 0, 0, cv::INTER_LINEAR);
  std::vector<std::uint8_t> data(dst.datastart, dst.dataend);
  return {width, height, std::move(data)};
}

GrayRaster resize_to_width(const GrayRaster& r, int target_width) {
  if (target_width < 1) throw Error("target width must be >= 1");
  const double scaled = static_cast<double>(r.height()) * target_width / r.width();
  const int h = std::max(1, static_cast<int>(std::lround(scaled)));
  return resize(r, target_width, h);
}

namespace {

template <typename Get, typename Put>
void rotate_into(int w, int h, int turns, Get get, Put put) {
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int nx = x;
      int ny = y;
      switch (turns) {
        case 1: nx = h - 1 - y; ny = x; break;
        case 2: nx = w - 1 - x; ny = h - 1 - y; break;
        case 3: nx = y; ny = w - 1 - x; break;
        default: break;
      }
      put(nx, ny, get(x, y));
    }
  }
}

int normalize_turns(int turns) { return ((turns % 4) + 4) % 4; }

}  // namespace

GrayRaster rotate_cw(const GrayRaster& r, int quarter_turns) {
  const int t = normalize_turns(quarter_turns);
  if (t == 0) return r;
  const bool swap = (t % 2) == 1;
  GrayRaster out(swap ? r.height() : r.width(), swap ? r.width() : r.height());
  rotate_into(r.width(), r.height(), t, [&](int x, int y) { return r.at(x, y); },
              [&](int x, int y, std::uint8_t v) { out.at(x, y) = v; });
  return out;
}

BinaryRaster rotate_cw(const BinaryRaster& r, int quarter_turns) {
  const int t = normalize_turns(quarter_turns);
  if (t == 0) return r;
  const bool swap = (t % 2) == 1;
  BinaryRaster out(swap ? r.height() : r.width(), swap ? r.width() : r.height());
  rotate_into(r.width(), r.height(), t, [&](int x, int y) { return r.at(x, y); },
              [&](int x, int y, bool v) { out.set(x, y, v); });
  return out;
}

GrayRaster crop(const GrayRaster& r, const Rect& region, std::uint8_t fill) {
  if (region.empty()) throw Error("crop region must be non-empty");
  GrayRaster out(region.w, region.h, fill);
  const Rect clip = intersect(region, Rect{0, 0, r.width(), r.height()});
  for (int y = clip.y; y < clip.bottom(); ++y) {
    const auto src = r.row(y);
    auto dst = out.row(y - region.y);
    std::copy(src.begin() + clip.x, src.begin() + clip.right(), dst.begin() + (clip.x - region.x));
  }
  return out;
}

BinaryRaster crop(const BinaryRaster& r, const Rect& region) {
  BinaryRaster out(region.w, region.h);
  const Rect clip = intersect(region, Rect{0, 0, r.width(), r.height()});
  for (int y = clip.y; y < clip.bottom(); ++y) {
    const auto* src = r.row_ptr(y);
    auto* dst = out.row_ptr(y - region.y);
    std::copy(src + clip.x, src + clip.right(), dst + (clip.x - region.x));
  }
  return out;
}

namespace {

template <typename Op>
BinaryRaster combine(const BinaryRaster& a, const BinaryRaster& b, Op op) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error("binary raster dimensions differ");
  }
  BinaryRaster out(a.width(), a.height());
  auto& o = out.bits();
  const auto& x = a.bits();
  const auto& y = b.bits();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = op(x[i], y[i]) ? 1 : 0;
  return out;
}

}  // namespace

BinaryRaster logical_and(const BinaryRaster& a, const BinaryRaster& b) {
  return combine(a, b, [](std::uint8_t p, std::uint8_t q) { return p && q; });
}

BinaryRaster logical_or(const BinaryRaster& a, const BinaryRaster& b) {
  return combine(a, b, [](std::uint8_t p, std::uint8_t q) { return p || q; });
}

BinaryRaster subtract(const BinaryRaster& a, const BinaryRaster& b) {
  return combine(a, b, [](std::uint8_t p, std::uint8_t q) { return p && !q; });
}

BinaryRaster logical_not(const BinaryRaster& a) {
  BinaryRaster out(a.width(), a.height());
  auto& o = out.bits();
  const auto& x = a.bits();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] ? 0 : 1;
  return out;
}

GrayRaster to_gray(const BinaryRaster& a) {
  std::vector<std::uint8_t> data(a.bits().size());
  const auto& bits = a.bits();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = bits[i] ? 0 : 255;
  return {a.width(), a.height(), std::move(data)};
}

}  // namespace pidparse
