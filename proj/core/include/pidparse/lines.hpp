#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pidparse/raster.hpp"

namespace pidparse {

/// Axis-aligned line with p1 <= p2 along its orientation axis.
struct LineSegment {
  Point p1;
  Point p2;
  Orientation orientation = Orientation::horizontal;
  LineStyle style = LineStyle::solid;

  [[nodiscard]] double length() const;
  [[nodiscard]] int axis_start() const { return orientation == Orientation::horizontal ? p1.x : p1.y; }
  [[nodiscard]] int axis_end() const { return orientation == Orientation::horizontal ? p2.x : p2.y; }
  [[nodiscard]] double perp() const {
    return orientation == Orientation::horizontal ? (p1.y + p2.y) / 2.0 : (p1.x + p2.x) / 2.0;
  }
  [[nodiscard]] double mid_x() const { return (p1.x + p2.x) / 2.0; }
  [[nodiscard]] double mid_y() const { return (p1.y + p2.y) / 2.0; }

  friend bool operator==(const LineSegment&, const LineSegment&) = default;
};

/// Builds a segment from an axis interval and a perpendicular coordinate.
LineSegment make_segment(Orientation o, int axis_from, int axis_to, int perp,
                         LineStyle style = LineStyle::solid);

/// Orientation, then p1.y, then p1.x (then p2 for full determinism).
void sort_segments(std::vector<LineSegment>& segments);

struct LineDetectConfig {
  double kernel_fraction = 0.001;  // of the larger image dimension
  int min_kernel = 5;
  int dash_jump_limit = 3;         // consecutive missing dashes that split a chain
  double dash_merge_eps = 50.0;
  int dash_merge_min_pts = 2;
  int min_dashes = 4;                 // per reported dashed line
  double min_dashed_kernels = 20.0;   // shortest dashed line, in kernel lengths

  [[nodiscard]] int kernel_length(int width, int height) const;
  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

struct SolidLineDetection {
  std::vector<LineSegment> segments;
  BinaryRaster horizontal;  // opened with the horizontal kernel
  BinaryRaster vertical;    // opened with the vertical kernel
  int kernel_length = 0;
};

/// Opening with a line kernel per orientation, then one segment per
/// 8-connected component from the extreme hull points along the kernel axis.
/// The perpendicular coordinate of both endpoints is the component centroid's.
SolidLineDetection detect_solid_lines_detailed(const BinaryRaster& a, const LineDetectConfig& cfg);
std::vector<LineSegment> detect_solid_lines(const BinaryRaster& a, const LineDetectConfig& cfg);

/// Segments extracted from an already-opened raster of one orientation.
std::vector<LineSegment> segments_from_opened(const BinaryRaster& opened, Orientation o);

struct DashedLines {
  std::vector<LineSegment> lines;
  std::vector<std::size_t> consumed;  // indices into the input consumed as dashes, ascending
};

/// Groups short collinear solid segments with a consistent dash/gap rhythm into
/// dashed lines. Short = length below 3 x kernel_length. With `ink`, a segment
/// is isolated when its ink blob is no thicker than kernel_length and does not
/// extend past its ends; the rhythm comes from isolated pairs only and a chain
/// needs 60% isolated members.
DashedLines detect_dashed_lines(std::span<const LineSegment> segments, int kernel_length,
                                const LineDetectConfig& cfg, const BinaryRaster* ink = nullptr);

/// Solid segments not consumed as dashes plus the dashed lines, sorted.
std::vector<LineSegment> detect_lines(const BinaryRaster& ink, const LineDetectConfig& cfg);
/// Same, reusing a solid detection of `ink`.
std::vector<LineSegment> detect_lines(const SolidLineDetection& solid, const BinaryRaster& ink,
                                      const LineDetectConfig& cfg);

struct HoughParams {
  double angle_tolerance_deg = 2.0;  // bins around 0 and 90 degrees
  double angle_step_deg = 1.0;
  int vote_threshold = 0;  // 0 = 3 x kernel length
  int min_length = 0;      // 0 = 2 x kernel length
  int max_gap = 2;
  int line_width = 3;      // pixels cleared across a walked segment
  int kernel_length = 7;
  std::uint64_t seed = 12345;
};

/// Progressive probabilistic Hough transform restricted to near-axis angles.
/// Used as the comparison baseline only.
std::vector<LineSegment> detect_lines_hough(const BinaryRaster& a, const HoughParams& params);

}  // namespace pidparse
