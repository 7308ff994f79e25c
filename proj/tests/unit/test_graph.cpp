#include <gtest/gtest.h>

#include <random>

#include "pidparse/error.hpp"
#include "pidparse/graph.hpp"

using namespace pidparse;

namespace {

LineSegment hseg(int x1, int x2, int y) { return make_segment(Orientation::horizontal, x1, x2, y); }
LineSegment vseg(int y1, int y2, int x) { return make_segment(Orientation::vertical, y1, y2, x); }

GraphConfig cfg_with(std::vector<std::string> regexes = {}) {
  GraphConfig c;
  c.label_regexes = std::move(regexes);
  return c;
}

int vertex_id(const PidGraph& g, Point p) {
  for (std::size_t i = 0; i < g.vertices.size(); ++i)
    if (g.vertices[i] == p) return static_cast<int>(i);
  return -1;
}

// Three-edge path along y = 0: (0,0)-(100,0)-(200,0)-(300,0).
PidGraph path3() {
  PidGraph g;
  g.vertices = {{0, 0}, {100, 0}, {200, 0}, {300, 0}};
  g.edges = {{0, 1}, {1, 2}, {2, 3}};
  return g;
}

}  // namespace

TEST(FilterLines, ThresholdAndEmpty) {
  EXPECT_TRUE(filter_lines({}, {}, {}, 14).empty());
  // length 13 = alpha - 1
  EXPECT_TRUE(filter_lines({hseg(0, 13, 5)}, {}, {}, 14).empty());
  EXPECT_EQ(filter_lines({hseg(0, 14, 5)}, {}, {}, 14).size(), 1u);
}

TEST(FilterLines, MidpointInsideTextOrSymbolDropped) {
  const auto l = hseg(0, 100, 50);
  EXPECT_TRUE(filter_lines({l}, {{40, 45, 20, 10}}, {}, 14).empty());
  EXPECT_EQ(filter_lines({l}, {{80, 45, 20, 10}}, {}, 14).size(), 1u);
}

TEST(FilterLines, CrossingSymbolIsTruncated) {
  const auto out = filter_lines({hseg(0, 300, 50)}, {}, {{100, 20, 60, 60}}, 14);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], hseg(0, 99, 50));
  EXPECT_EQ(out[1], hseg(160, 300, 50));
  // Short leftovers vanish.
  const auto short_side = filter_lines({vseg(0, 300, 120)}, {}, {{100, 10, 60, 200}}, 14);
  ASSERT_EQ(short_side.size(), 1u);
  EXPECT_EQ(short_side[0], vseg(210, 300, 120));
}

TEST(BuildGraph, SingleLine) {
  const auto g = build_graph({hseg(0, 100, 0)}, 14, cfg_with());
  EXPECT_EQ(g.vertices.size(), 2u);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0].v1, 0);
  EXPECT_EQ(g.edges[0].v2, 1);
}

TEST(BuildGraph, PlusJunction) {
  const auto g = build_graph({hseg(0, 47, 50), hseg(53, 100, 50), vseg(0, 48, 50), vseg(52, 100, 50)}, 14, cfg_with());
  ASSERT_EQ(g.vertices.size(), 5u);
  EXPECT_EQ(g.edges.size(), 4u);
  const int c = vertex_id(g, {50, 50});
  ASSERT_GE(c, 0);
  EXPECT_EQ(g.degrees()[c], 4);
  for (const auto& adj : g.edge_adjacency()) EXPECT_EQ(adj.size(), 3u);
}

TEST(BuildGraph, TJunctionSplitsEdge) {
  GraphConfig c = cfg_with();
  // alpha 14, eta 0.5 -> reach 7 >= 2
  const auto g = build_graph({hseg(0, 100, 0), vseg(2, 80, 50)}, 14, c);
  EXPECT_EQ(g.vertices.size(), 4u);
  EXPECT_EQ(g.edges.size(), 3u);
  const int j = vertex_id(g, {50, 0});
  ASSERT_GE(j, 0);
  EXPECT_EQ(g.degrees()[j], 3);
}

TEST(BuildGraph, CrossingWithoutEndpointsIsNotAJunction) {
  const auto g = build_graph({hseg(0, 100, 50), vseg(0, 100, 50)}, 14, cfg_with());
  EXPECT_EQ(g.vertices.size(), 4u);
  EXPECT_EQ(g.edges.size(), 2u);
}

TEST(BuildGraph, DuplicateAndDegenerateCollapse) {
  const auto g = build_graph({hseg(0, 100, 0), hseg(1, 99, 1), hseg(300, 303, 0)}, 14, cfg_with());
  EXPECT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.vertices.size(), 2u);
}

TEST(BuildGraph, ConfigValidation) {
  GraphConfig c;
  c.eta = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.label_regexes = {"("};
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(GraphConfig{}.effective_alpha(7), 14.0);
}

// Random orthogonal networks: mains on a grid with branches that stop a few
// pixels short of a main (T-junctions) or cross it.
class RandomNetworks : public ::testing::TestWithParam<int> {};

TEST_P(RandomNetworks, ClusteringConservationDeterminism) {
  std::mt19937 rng(static_cast<unsigned>(GetParam()));
  std::uniform_int_distribution<int> gap(0, 3), coin(0, 1);
  std::vector<LineSegment> lines;
  const int rows = 3 + GetParam() % 3;
  for (int r = 0; r < rows; ++r) lines.push_back(hseg(0, 2000, 100 + 300 * r));
  for (int b = 0; b < 6; ++b) {
    const int x = 150 + 300 * b + 7 * (b % 3);
    const int r = b % (rows - 1);
    if (coin(rng)) lines.push_back(vseg(100 + 300 * r + gap(rng), 100 + 300 * (r + 1) - gap(rng), x));
    else lines.push_back(vseg(40, 100 + 300 * (rows - 1) + 60, x));  // crosses everything
  }
  GraphConfig c = cfg_with();
  const double alpha = 14;
  const double radius = std::min(c.cluster_eps, 2 * c.eta * alpha);
  const auto g = build_graph(lines, alpha, c);

  for (std::size_t i = 0; i < g.vertices.size(); ++i)
    for (std::size_t j = i + 1; j < g.vertices.size(); ++j)
      EXPECT_GE(std::hypot(g.vertices[i].x - g.vertices[j].x, g.vertices[i].y - g.vertices[j].y), radius);

  for (const auto& e : g.edges) EXPECT_NE(e.v1, e.v2);
  const auto deg = g.degrees();
  for (int d : deg) EXPECT_GE(d, 1);

  // Every sample of every input line is near some edge, and vice versa.
  for (const auto& l : lines) {
    for (int k = 0; k <= 20; ++k) {
      const double px = l.p1.x + (l.p2.x - l.p1.x) * k / 20.0, py = l.p1.y + (l.p2.y - l.p1.y) * k / 20.0;
      double best = 1e18;
      for (const auto& e : g.edges)
        best = std::min(best, point_segment_distance(px, py, g.vertices[e.v1], g.vertices[e.v2]));
      EXPECT_LE(best, c.eta * alpha) << px << "," << py;
    }
  }
  EXPECT_EQ(build_graph(lines, alpha, c).to_json(), g.to_json());
  auto shuffled = lines;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  EXPECT_EQ(build_graph(shuffled, alpha, c).edges.size(), g.edges.size());
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomNetworks, ::testing::Range(1, 13));

TEST(EdgeLabels, NearestEdgeAndGreedyConflicts) {
  PidGraph g;
  g.vertices = {{0, 0}, {0, 100}, {100, 0}, {100, 100}};
  g.edges = {{0, 2}, {1, 3}};  // y = 0 and y = 100
  const GraphConfig c = cfg_with({"^P-[0-9]+$"});
  auto l = assign_edge_labels(g, {{{40, -10, 20, 10}, "P-104", Orientation::horizontal, 1}}, c);
  EXPECT_EQ(l.edges[0].label, "P-104");
  EXPECT_EQ(l.edges[0].label_source, LabelSource::direct);
  EXPECT_FALSE(l.edges[1].label);

  // Both nearest to y = 0; the nearer wins it, the other falls to y = 100.
  l = assign_edge_labels(g,
                         {{{40, 10, 20, 10}, "P-1", Orientation::horizontal, 1},
                          {{40, -8, 20, 10}, "P-2", Orientation::horizontal, 1}},
                         c);
  EXPECT_EQ(l.edges[0].label, "P-2");
  EXPECT_EQ(l.edges[1].label, "P-1");

  l = assign_edge_labels(g, {{{40, -10, 20, 10}, "north", Orientation::horizontal, 1}}, c);
  EXPECT_FALSE(l.edges[0].label);
  EXPECT_FALSE(l.edges[1].label);

  std::vector<std::string> warnings;
  l = assign_edge_labels(g, {{{40, -10, 20, 10}, "P-104", Orientation::horizontal, 1}}, cfg_with(), &warnings);
  EXPECT_FALSE(l.edges[0].label);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(Propagation, PathSpreadsFromLabeledEdge) {
  auto g = path3();
  g.edges[0].label = "L";
  g.edges[0].label_source = LabelSource::direct;
  const auto p = propagate_labels(g);
  for (const auto& e : p.edges) EXPECT_EQ(e.label, "L");
  EXPECT_EQ(p.edges[1].label_source, LabelSource::propagated);
  EXPECT_EQ(p.edges[2].label_source, LabelSource::propagated);
  EXPECT_EQ(propagate_labels(p), p);
}

TEST(Propagation, LabeledEdgeBlocksAndOrderIsLeftToRight) {
  auto g = path3();
  g.edges[0].label = "A";
  g.edges[0].label_source = LabelSource::direct;
  g.edges[2].label = "B";
  g.edges[2].label_source = LabelSource::direct;
  const auto p = propagate_labels(g);
  EXPECT_EQ(p.edges[1].label, "A");
  EXPECT_EQ(p.edges[2].label, "B");
  EXPECT_EQ(propagate_labels(p), p);

  // Fully labeled graph is untouched.
  auto full = path3();
  for (auto& e : full.edges) {
    e.label = "X";
    e.label_source = LabelSource::direct;
  }
  EXPECT_EQ(propagate_labels(full), full);
}

TEST(Propagation, NeverOverwritesAndIsIdempotentOnRandomGraphs) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    PidGraph g;
    const int n = 3 + trial % 10;
    for (int i = 0; i < n; ++i) g.vertices.push_back({i * 10, (i * 7) % 13});
    std::uniform_int_distribution<int> pick(0, n - 1), coin(0, 3);
    for (int k = 0; k < n + 3; ++k) {
      int a = pick(rng), b = pick(rng);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      PidEdge e{a, b};
      if (coin(rng) == 0) {
        e.label = "L" + std::to_string(k);
        e.label_source = LabelSource::direct;
      }
      g.edges.push_back(e);
    }
    const auto p = propagate_labels(g);
    for (std::size_t i = 0; i < g.edges.size(); ++i)
      if (g.edges[i].label) EXPECT_EQ(p.edges[i].label, g.edges[i].label);
    EXPECT_EQ(propagate_labels(p), p);
  }
}
