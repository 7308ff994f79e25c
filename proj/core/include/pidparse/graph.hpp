#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pidparse/lines.hpp"
#include "pidparse/text.hpp"

namespace pidparse {

enum class LabelSource { none, direct, propagated };
std::string_view to_string(LabelSource s);

struct PidEdge {
  int v1 = 0;
  int v2 = 0;
  LineStyle style = LineStyle::solid;
  std::optional<std::string> label;
  LabelSource label_source = LabelSource::none;

  friend bool operator==(const PidEdge&, const PidEdge&) = default;
};

/// Vertices are sorted by (x, y); edges have v1 < v2 and are sorted by (v1, v2).
struct PidGraph {
  std::vector<Point> vertices;
  std::vector<PidEdge> edges;

  [[nodiscard]] std::vector<int> degrees() const;
  /// For each edge, the ids of the other edges sharing one of its vertices (ascending).
  [[nodiscard]] std::vector<std::vector<int>> edge_adjacency() const;
  /// Stable text form; identical graphs give identical strings.
  [[nodiscard]] std::string to_json() const;

  friend bool operator==(const PidGraph&, const PidGraph&) = default;
};

struct GraphConfig {
  double alpha = 0.0;  // minimum line length; 0 means 2 x kernel length
  double eta = 0.5;
  double cluster_eps = 50.0;
  int cluster_min_pts = 2;
  std::vector<std::string> label_regexes;

  void validate() const;
  /// alpha, or 2 x kernel_length when alpha is unset.
  [[nodiscard]] double effective_alpha(int kernel_length) const;
};

/// Drops lines shorter than alpha or with their midpoint inside a text or
/// symbol box. Lines crossing a symbol box are first cut at its border; the
/// pieces outside are kept when at least alpha long.
std::vector<LineSegment> filter_lines(const std::vector<LineSegment>& lines, const std::vector<Rect>& text_boxes,
                                      const std::vector<Rect>& symbol_boxes, double alpha);

/// One edge per line; endpoints within eta*alpha of another edge's interior
/// split it at the projection (and move onto it); endpoints are clustered
/// with radius min(cluster_eps, 2*eta*alpha) until no two vertices are closer
/// than that radius; degenerate and duplicate edges are removed.
PidGraph build_graph(const std::vector<LineSegment>& lines, double alpha, const GraphConfig& cfg);

/// Distance from (px, py) to the closed segment a-b.
double point_segment_distance(double px, double py, Point a, Point b);

/// Attaches texts matching any label regex to their nearest edges, greedily by
/// ascending distance, one text per edge and one edge per text.
PidGraph assign_edge_labels(PidGraph g, const std::vector<TextBox>& texts, const GraphConfig& cfg,
                            std::vector<std::string>* warnings = nullptr);

/// Breadth-first spread of each direct label over unlabeled edges, sources and
/// neighbours taken left to right (leftmost x, then topmost y, then id).
/// Labeled edges are never overwritten and never expanded through.
PidGraph propagate_labels(PidGraph g);

}  // namespace pidparse
