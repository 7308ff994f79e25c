#include "pidparse/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <nlohmann/json.hpp>
#include <regex>
#include <tuple>

#include "pidparse/dbscan.hpp"
#include "pidparse/error.hpp"

namespace pidparse {

std::string_view to_string(LabelSource s) {
  switch (s) {
    case LabelSource::direct: return "direct";
    case LabelSource::propagated: return "propagated";
    default: return "none";
  }
}

std::vector<int> PidGraph::degrees() const {
  std::vector<int> d(vertices.size(), 0);
  for (const auto& e : edges) {
    ++d[e.v1];
    ++d[e.v2];
  }
  return d;
}

std::vector<std::vector<int>> PidGraph::edge_adjacency() const {
  std::vector<std::vector<int>> incident(vertices.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    incident[edges[i].v1].push_back(static_cast<int>(i));
    incident[edges[i].v2].push_back(static_cast<int>(i));
  }
  std::vector<std::vector<int>> adj(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    for (int v : {edges[i].v1, edges[i].v2})
      for (int j : incident[v])
        if (j != static_cast<int>(i)) adj[i].push_back(j);
    std::sort(adj[i].begin(), adj[i].end());
    adj[i].erase(std::unique(adj[i].begin(), adj[i].end()), adj[i].end());
  }
  return adj;
}

std::string PidGraph::to_json() const {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (const auto& v : vertices) j["vertices"].push_back({v.x, v.y});
  j["edges"] = nlohmann::json::array();
  for (const auto& e : edges) {
    j["edges"].push_back({{"v1", e.v1},
                          {"v2", e.v2},
                          {"style", std::string(to_string(e.style))},
                          {"label", e.label ? nlohmann::json(*e.label) : nlohmann::json()},
                          {"label_source", std::string(to_string(e.label_source))}});
  }
  return j.dump();
}

void GraphConfig::validate() const {
  if (alpha < 0) throw ConfigError("graph.alpha must be > 0 (or 0 for the default)");
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("graph.eta must lie in (0, 1)");
  if (!(cluster_eps > 0.0)) throw ConfigError("graph.cluster_eps must be > 0");
  if (cluster_min_pts < 1) throw ConfigError("graph.cluster_min_pts must be >= 1");
  for (const auto& r : label_regexes) {
    try {
      std::regex re(r);
    } catch (const std::regex_error& e) {
      throw ConfigError("graph.label_regexes: bad pattern '" + r + "': " + e.what());
    }
  }
}

double GraphConfig::effective_alpha(int kernel_length) const {
  return alpha > 0 ? alpha : 2.0 * kernel_length;
}

// ---------------------------------------------------------------------------
// Filtering

namespace {

// Pieces of `s` outside `box` (pixel coordinates, box exclusive on the far side).
std::vector<LineSegment> cut_by_box(const LineSegment& s, const Rect& box) {
  const bool h = s.orientation == Orientation::horizontal;
  const int perp = h ? s.p1.y : s.p1.x;
  const int lo = h ? box.y : box.x, hi = h ? box.bottom() : box.right();
  const int a0 = h ? box.x : box.y, a1 = h ? box.right() : box.bottom();
  if (perp < lo || perp >= hi || s.axis_end() < a0 || s.axis_start() >= a1) return {s};
  std::vector<LineSegment> out;
  if (s.axis_start() <= a0 - 1) out.push_back(make_segment(s.orientation, s.axis_start(), a0 - 1, perp, s.style));
  if (s.axis_end() >= a1) out.push_back(make_segment(s.orientation, a1, s.axis_end(), perp, s.style));
  return out;
}

}  // namespace

std::vector<LineSegment> filter_lines(const std::vector<LineSegment>& lines, const std::vector<Rect>& text_boxes,
                                      const std::vector<Rect>& symbol_boxes, double alpha) {
  std::vector<LineSegment> out;
  for (const auto& line : lines) {
    if (line.length() < alpha) continue;
    std::vector<LineSegment> pieces{line};
    for (const auto& box : symbol_boxes) {
      std::vector<LineSegment> next;
      for (const auto& p : pieces) {
        auto cut = cut_by_box(p, box);
        next.insert(next.end(), cut.begin(), cut.end());
      }
      pieces = std::move(next);
    }
    for (const auto& p : pieces) {
      if (p.length() < alpha) continue;
      auto inside = [&](const Rect& r) { return r.contains(p.mid_x(), p.mid_y()); };
      if (std::any_of(text_boxes.begin(), text_boxes.end(), inside)) continue;
      if (std::any_of(symbol_boxes.begin(), symbol_boxes.end(), inside)) continue;
      out.push_back(p);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Graph construction

double point_segment_distance(double px, double py, Point a, Point b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((px - a.x) * dx + (py - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (a.x + t * dx), py - (a.y + t * dy));
}

namespace {

struct WorkEdge {
  Vec2 a, b;
  LineStyle style;
};

double dist(const Vec2& p, const Vec2& q) { return std::hypot(p.x - q.x, p.y - q.y); }

// Projection of p onto segment a-b as (parameter, point).
std::pair<double, Vec2> project(const Vec2& p, const Vec2& a, const Vec2& b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 <= 0) return {0.0, a};
  const double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
  return {t, {a.x + t * dx, a.y + t * dy}};
}

Point rounded(const Vec2& v) {
  return {static_cast<int>(std::lround(v.x)), static_cast<int>(std::lround(v.y))};
}

}  // namespace

PidGraph build_graph(const std::vector<LineSegment>& lines, double alpha, const GraphConfig& cfg) {
  cfg.validate();
  const double reach = cfg.eta * alpha;
  const double radius = std::min(cfg.cluster_eps, 2.0 * reach);

  std::vector<WorkEdge> edges;
  for (const auto& l : lines)
    edges.push_back({{static_cast<double>(l.p1.x), static_cast<double>(l.p1.y)},
                     {static_cast<double>(l.p2.x), static_cast<double>(l.p2.y)},
                     l.style});

  // T-junctions: an endpoint close to another edge's interior moves onto it
  // and splits that edge there.
  std::vector<std::vector<std::pair<double, Vec2>>> splits(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    for (Vec2* end : {&edges[i].a, &edges[i].b}) {
      double best = reach;
      int best_j = -1;
      std::pair<double, Vec2> best_proj;
      for (std::size_t j = 0; j < edges.size(); ++j) {
        if (j == i) continue;
        const auto pr = project(*end, edges[j].a, edges[j].b);
        if (pr.first <= 0.0 || pr.first >= 1.0) continue;
        if (dist(pr.second, edges[j].a) <= reach || dist(pr.second, edges[j].b) <= reach) continue;
        const double d = dist(*end, pr.second);
        if (d <= best) {
          if (best_j >= 0 && d == best) continue;
          best = d;
          best_j = static_cast<int>(j);
          best_proj = pr;
        }
      }
      if (best_j >= 0) {
        *end = best_proj.second;
        splits[best_j].push_back(best_proj);
      }
    }
  }
  std::vector<WorkEdge> pieces;
  for (std::size_t j = 0; j < edges.size(); ++j) {
    auto& sp = splits[j];
    std::sort(sp.begin(), sp.end(), [](const auto& p, const auto& q) { return p.first < q.first; });
    Vec2 from = edges[j].a;
    for (const auto& [t, q] : sp) {
      pieces.push_back({from, q, edges[j].style});
      from = q;
    }
    pieces.push_back({from, edges[j].b, edges[j].style});
  }

  // Endpoint clustering to a fixpoint: cluster, replace by centroids, repeat
  // until no cluster merges two distinct vertices.
  std::vector<Point> pts;
  std::vector<int> end_vertex(pieces.size() * 2);
  {
    std::map<Point, int> index;
    for (std::size_t k = 0; k < pieces.size() * 2; ++k) {
      const Point p = rounded(k % 2 == 0 ? pieces[k / 2].a : pieces[k / 2].b);
      auto [it, fresh] = index.emplace(p, static_cast<int>(pts.size()));
      if (fresh) pts.push_back(p);
      end_vertex[k] = it->second;
    }
  }
  while (true) {
    std::vector<Vec2> v;
    for (const auto& p : pts) v.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
    const auto labels = dbscan(v, radius, cfg.cluster_min_pts);
    std::map<int, std::pair<Vec2, int>> sums;
    bool merged = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (labels[i] < 0) continue;
      auto& [s, n] = sums[labels[i]];
      s.x += v[i].x;
      s.y += v[i].y;
      if (++n > 1) merged = true;
    }
    if (!merged) break;
    std::vector<Point> next;
    std::map<Point, int> index;
    std::vector<int> remap(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      Point p = pts[i];
      if (labels[i] >= 0) {
        const auto& [s, n] = sums[labels[i]];
        p = rounded({s.x / n, s.y / n});
      }
      auto [it, fresh] = index.emplace(p, static_cast<int>(next.size()));
      if (fresh) next.push_back(p);
      remap[i] = it->second;
    }
    for (auto& ev : end_vertex) ev = remap[ev];
    pts = std::move(next);
  }

  // Final ids: vertices sorted by (x, y); drop degenerate and duplicate edges.
  struct Raw {
    Point a, b;
    LineStyle style;
  };
  std::vector<Raw> raw;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    Point a = pts[end_vertex[2 * k]], b = pts[end_vertex[2 * k + 1]];
    if (a == b) continue;
    if (b < a) std::swap(a, b);
    raw.push_back({a, b, pieces[k].style});
  }
  std::sort(raw.begin(), raw.end(), [](const Raw& p, const Raw& q) {
    return std::tie(p.a, p.b, p.style) < std::tie(q.a, q.b, q.style);
  });
  raw.erase(std::unique(raw.begin(), raw.end(), [](const Raw& p, const Raw& q) { return p.a == q.a && p.b == q.b; }),
            raw.end());
  PidGraph g;
  for (const auto& r : raw) {
    g.vertices.push_back(r.a);
    g.vertices.push_back(r.b);
  }
  std::sort(g.vertices.begin(), g.vertices.end());
  g.vertices.erase(std::unique(g.vertices.begin(), g.vertices.end()), g.vertices.end());
  auto id = [&](Point p) {
    return static_cast<int>(std::lower_bound(g.vertices.begin(), g.vertices.end(), p) - g.vertices.begin());
  };
  for (const auto& r : raw) g.edges.push_back({id(r.a), id(r.b), r.style, std::nullopt, LabelSource::none});
  return g;
}

// ---------------------------------------------------------------------------
// Labels

PidGraph assign_edge_labels(PidGraph g, const std::vector<TextBox>& texts, const GraphConfig& cfg,
                            std::vector<std::string>* warnings) {
  if (cfg.label_regexes.empty()) {
    if (warnings) warnings->push_back("no pipeline label regexes configured; edges stay unlabeled");
    return g;
  }
  std::vector<std::regex> res;
  for (const auto& r : cfg.label_regexes) {
    try {
      res.emplace_back(r);
    } catch (const std::regex_error& e) {
      throw ConfigError("graph.label_regexes: bad pattern '" + r + "': " + e.what());
    }
  }
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t t = 0; t < texts.size(); ++t) {
    const bool match = std::any_of(res.begin(), res.end(), [&](const std::regex& re) {
      return std::regex_search(texts[t].text, re);
    });
    if (!match) continue;
    const double cx = texts[t].bbox.center_x(), cy = texts[t].bbox.center_y();
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      if (g.edges[e].label) continue;
      pairs.emplace_back(point_segment_distance(cx, cy, g.vertices[g.edges[e].v1], g.vertices[g.edges[e].v2]), t, e);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<bool> text_used(texts.size(), false), edge_used(g.edges.size(), false);
  for (const auto& [d, t, e] : pairs) {
    if (text_used[t] || edge_used[e]) continue;
    text_used[t] = edge_used[e] = true;
    g.edges[e].label = texts[t].text;
    g.edges[e].label_source = LabelSource::direct;
  }
  return g;
}

PidGraph propagate_labels(PidGraph g) {
  auto key = [&](int e) {
    const Point a = g.vertices[g.edges[e].v1], b = g.vertices[g.edges[e].v2];
    return std::tuple(std::min(a.x, b.x), std::min(a.y, b.y), e);
  };
  auto order = [&](std::vector<int>& ids) {
    std::sort(ids.begin(), ids.end(), [&](int p, int q) { return key(p) < key(q); });
  };
  std::vector<int> sources;
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    if (g.edges[e].label_source == LabelSource::direct && g.edges[e].label) sources.push_back(static_cast<int>(e));
  order(sources);
  auto adj = g.edge_adjacency();
  for (auto& a : adj) order(a);
  for (int s : sources) {
    std::deque<int> queue{s};
    while (!queue.empty()) {
      const int e = queue.front();
      queue.pop_front();
      for (int n : adj[e]) {
        if (g.edges[n].label) continue;
        g.edges[n].label = g.edges[s].label;
        g.edges[n].label_source = LabelSource::propagated;
        queue.push_back(n);
      }
    }
  }
  return g;
}

}  // namespace pidparse
