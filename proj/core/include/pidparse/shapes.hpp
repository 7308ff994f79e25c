#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "pidparse/lines.hpp"
#include "pidparse/raster.hpp"
#include "pidparse/symbol.hpp"
#include "pidparse/text.hpp"

namespace pidparse {

struct Circle {
  Point center;
  int radius = 0;
  double score = 0.0;  // fraction of the circumference found on ink

  friend bool operator==(const Circle&, const Circle&) = default;
};

struct RectShape {
  std::array<Point, 4> corners;  // clockwise from top-left
  std::array<double, 4> edge_support{};  // top, right, bottom, left

  [[nodiscard]] Rect bbox() const;
  friend bool operator==(const RectShape&, const RectShape&) = default;
};

struct ShapeConfig {
  double radius_min_fraction = 0.005;  // of the larger image dimension
  double radius_max_fraction = 0.02;
  double hough_vote_min = 0.6;         // circumference fraction on ink
  double rect_edge_support_min = 0.85;
  double rect_min_side_fraction = 0.006;
  double rect_max_side_fraction = 0.05;
  int corner_tolerance = 2;

  void validate() const;
  [[nodiscard]] int radius_min(int width, int height) const;
  [[nodiscard]] int radius_max(int width, int height) const;
};

/// Hough circles accumulated per overlapping patch (side 4 x max radius, 50%
/// overlap). Long straight strokes are removed before voting; candidates are
/// verified against the full raster and duplicates across patches merged.
std::vector<Circle> detect_circles(const BinaryRaster& a, const ShapeConfig& cfg);

/// Merges circles whose centers are within 3 px and radii within 2 px,
/// keeping the higher score. Output sorted by (y, x, r).
std::vector<Circle> dedupe_circles(std::vector<Circle> circles);

/// Fraction of sampled circumference points that have ink within one pixel.
double circle_support(const BinaryRaster& a, double cx, double cy, double r);

/// Centroids of the components of (hlines dilated by 2) AND (vlines dilated by 2).
std::vector<Point> sample_rect_vertices(const BinaryRaster& hlines, const BinaryRaster& vlines);

/// Coverage of the straight path between two points on an axis, allowing one
/// pixel of perpendicular slack.
double edge_support(const BinaryRaster& a, Point from, Point to);

/// Axis-aligned rectangles whose corners are all sampled vertices (agreeing
/// within the corner tolerance) and whose four sides are drawn.
std::vector<RectShape> verify_rectangles(const std::vector<Point>& vertices, const BinaryRaster& a,
                                         const ShapeConfig& cfg);

/// Declarative composition rule for one basic-shape class.
struct CompositionRule {
  enum class Shapes { circle, rect, circle_rect };
  enum class Relation { any, no_chord, horizontal_chord, inscribed, tangent_above };
  enum class TextReq { any, inside, none, above_chord };

  int class_id = 0;
  Shapes shapes = Shapes::circle;
  Relation relation = Relation::any;
  TextReq text = TextReq::any;
  std::string text_regex;  // applied to the embedded text when non-empty

  /// Number of predicates a full match satisfies; higher wins.
  [[nodiscard]] int weight() const;
};

struct RuleTable {
  std::vector<CompositionRule> rules;

  static RuleTable defaults();
  static RuleTable from_json(const std::string& json_text);
  static RuleTable load(const std::filesystem::path& path);
  [[nodiscard]] std::string to_json() const;
};

/// Combines circles, rectangles, lines and texts into basic-shape symbols by
/// the rule table. A shape joins at most one symbol; equal-weight matches on
/// the same shapes are emitted together and flagged ambiguous. The binary
/// raster provides tight ink bounds for the symbol boxes.
std::vector<SymbolInstance> assemble_basic_symbols(const std::vector<Circle>& circles,
                                                   const std::vector<RectShape>& rects,
                                                   const std::vector<LineSegment>& lines,
                                                   const std::vector<TextBox>& texts, const RuleTable& rules,
                                                   const BinaryRaster* ink = nullptr);

}  // namespace pidparse
