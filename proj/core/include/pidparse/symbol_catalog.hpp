#pragma once

#include <optional>
#include <string>

#include "pidparse/raster.hpp"

namespace pidparse {

/// Class id for symbols outside the recognized set.
inline constexpr int kOthers = 0;
/// Classes 1..25 share a valve-like silhouette; 26..32 are circle/rectangle compositions.
inline constexpr int kComplexClassCount = 25;
inline constexpr int kClassCount = 32;

[[nodiscard]] inline bool is_complex_class(int c) { return c >= 1 && c <= kComplexClassCount; }
[[nodiscard]] inline bool is_basic_class(int c) { return c > kComplexClassCount && c <= kClassCount; }
[[nodiscard]] inline bool is_valid_class(int c) { return c >= 1 && c <= kClassCount; }

/// "symbol_7", or "others" for kOthers.
std::string class_name(int class_id);
/// Inverse of class_name; also accepts plain integers. Throws ConfigError.
int class_from_name(const std::string& name);

/// Canvas side for complex symbols on a sheet of the given width.
int complex_symbol_size(int sheet_width);
/// Canvas side for basic-shape symbols on a sheet of the given width.
int basic_symbol_size(int sheet_width);
/// Stroke width in pixels for a class rendered at `size`.
double symbol_stroke(int class_id, int size);

/// Where a basic symbol carries its embedded text: the text's center in canvas
/// coordinates (unrotated). Empty for classes without embedded text.
std::optional<std::pair<double, double>> embedded_text_center(int class_id, int size);

/// Deterministic render on a white size x size canvas, rotated clockwise by
/// rotation_deg (a multiple of 90). With `canonical_text`, text-distinguished
/// basic classes carry a fixed tag so every class renders differently; the
/// sheet generator passes false and draws real labels itself.
GrayRaster render_symbol(int class_id, int size, int rotation_deg = 0, bool canonical_text = true);

/// The canonical tag drawn for basic classes (empty when none).
std::string canonical_tag(int class_id);

}  // namespace pidparse
