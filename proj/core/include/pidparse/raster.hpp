#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pidparse/types.hpp"

namespace pidparse {

/// 8-bit grayscale image, row-major, 0 = black ink, 255 = white background.
class GrayRaster {
 public:
  GrayRaster() = default;
  GrayRaster(int width, int height, std::uint8_t fill = 255);
  GrayRaster(int width, int height, std::vector<std::uint8_t> data);

  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] bool empty() const { return data_.empty(); }
  [[nodiscard]] bool in_bounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  [[nodiscard]] std::uint8_t at(int x, int y) const {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::uint8_t& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  [[nodiscard]] std::span<const std::uint8_t> row(int y) const {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }
  [[nodiscard]] std::span<std::uint8_t> row(int y) {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }

  [[nodiscard]] const std::vector<std::uint8_t>& data() const { return data_; }
  std::vector<std::uint8_t>& data() { return data_; }

  friend bool operator==(const GrayRaster&, const GrayRaster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Boolean pixel grid; true marks foreground ink. Stored one byte per pixel.
class BinaryRaster {
 public:
  BinaryRaster() = default;
  BinaryRaster(int width, int height, bool fill = false);

  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] bool in_bounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  [[nodiscard]] bool at(int x, int y) const {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  /// Out-of-bounds reads return background.
  [[nodiscard]] bool get(int x, int y) const { return in_bounds(x, y) && at(x, y); }
  void set(int x, int y, bool v) { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }

  [[nodiscard]] const std::uint8_t* row_ptr(int y) const {
    return bits_.data() + static_cast<std::size_t>(y) * width_;
  }
  std::uint8_t* row_ptr(int y) { return bits_.data() + static_cast<std::size_t>(y) * width_; }

  [[nodiscard]] const std::vector<std::uint8_t>& bits() const { return bits_; }
  std::vector<std::uint8_t>& bits() { return bits_; }

  [[nodiscard]] std::size_t count() const;

  friend bool operator==(const BinaryRaster&, const BinaryRaster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct BinarizePolicy {
  enum class Kind { fixed, otsu };
  Kind kind = Kind::fixed;
  int threshold = 128;

  static BinarizePolicy fixed(int t) { return {Kind::fixed, t}; }
  static BinarizePolicy otsu() { return {Kind::otsu, 128}; }
};

/// Otsu threshold t: splitting the histogram into [0, t) and [t, 255] maximizes
/// between-class variance. Constant images yield 128.
int otsu_threshold(const GrayRaster& r);

/// Foreground = intensity < threshold.
BinaryRaster binarize(const GrayRaster& r, BinarizePolicy policy = {});

/// Bilinear resize to the target width; height keeps the aspect ratio (rounded, min 1).
GrayRaster resize_to_width(const GrayRaster& r, int target_width);
GrayRaster resize(const GrayRaster& r, int width, int height);

/// Quarter turns clockwise. (x, y) maps to (H-1-y, x) for one turn.
GrayRaster rotate_cw(const GrayRaster& r, int quarter_turns = 1);
BinaryRaster rotate_cw(const BinaryRaster& r, int quarter_turns = 1);

/// Copy of the region clipped to the raster; pixels outside become `fill`.
GrayRaster crop(const GrayRaster& r, const Rect& region, std::uint8_t fill = 255);
BinaryRaster crop(const BinaryRaster& r, const Rect& region);

BinaryRaster logical_and(const BinaryRaster& a, const BinaryRaster& b);
BinaryRaster logical_or(const BinaryRaster& a, const BinaryRaster& b);
BinaryRaster logical_not(const BinaryRaster& a);
/// a AND NOT b.
BinaryRaster subtract(const BinaryRaster& a, const BinaryRaster& b);

/// Ink = black (0), background = white (255).
GrayRaster to_gray(const BinaryRaster& a);

}  // namespace pidparse
