#include "pidparse/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <tuple>

#include "pidparse/components.hpp"
#include "pidparse/error.hpp"
#include "pidparse/image_io.hpp"
#include "pidparse/morphology.hpp"

namespace pidparse {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Rect RectShape::bbox() const { return rect_from_corners(corners[0], corners[2]); }

void ShapeConfig::validate() const {
  if (!(radius_min_fraction > 0 && radius_min_fraction < radius_max_fraction && radius_max_fraction < 0.5)) {
    throw ConfigError("shape radius fractions must satisfy 0 < min < max < 0.5");
  }
  if (!(hough_vote_min > 0 && hough_vote_min <= 1)) throw ConfigError("shape.hough_vote_min must lie in (0, 1]");
  if (!(rect_edge_support_min > 0 && rect_edge_support_min <= 1)) {
    throw ConfigError("shape.rect_edge_support_min must lie in (0, 1]");
  }
  if (!(rect_min_side_fraction > 0 && rect_min_side_fraction < rect_max_side_fraction)) {
    throw ConfigError("shape rectangle side fractions must satisfy 0 < min < max");
  }
  if (corner_tolerance < 0) throw ConfigError("shape.corner_tolerance must be >= 0");
}

int ShapeConfig::radius_min(int width, int height) const {
  return std::max(3, static_cast<int>(std::lround(radius_min_fraction * std::max(width, height))));
}
int ShapeConfig::radius_max(int width, int height) const {
  return std::max(radius_min(width, height) + 1,
                  static_cast<int>(std::lround(radius_max_fraction * std::max(width, height))));
}

// ---------------------------------------------------------------------------
// Circles

double circle_support(const BinaryRaster& a, double cx, double cy, double r) {
  const int n = std::max(16, static_cast<int>(std::lround(2 * kPi * r)));
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const double th = 2 * kPi * i / n;
    const int x = static_cast<int>(std::floor(cx + 0.5 + r * std::cos(th)));
    const int y = static_cast<int>(std::floor(cy + 0.5 + r * std::sin(th)));
    bool hit = false;
    for (int dy = -1; dy <= 1 && !hit; ++dy)
      for (int dx = -1; dx <= 1 && !hit; ++dx) hit = a.get(x + dx, y + dy);
    hits += hit;
  }
  return static_cast<double>(hits) / n;
}

namespace {

// Support without slack; sharper for locating the ring centerline.
double exact_support(const BinaryRaster& a, double cx, double cy, double r) {
  const int n = std::max(16, static_cast<int>(std::lround(2 * kPi * r)));
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const double th = 2 * kPi * i / n;
    hits += a.get(static_cast<int>(std::floor(cx + 0.5 + r * std::cos(th))),
                  static_cast<int>(std::floor(cy + 0.5 + r * std::sin(th))));
  }
  return static_cast<double>(hits) / n;
}

double ring_score(const BinaryRaster& a, int cx, int cy, int r) {
  return exact_support(a, cx, cy, r - 1) + exact_support(a, cx, cy, r) + exact_support(a, cx, cy, r + 1);
}

struct EdgePixel {
  int x, y;
  double ux, uy;
};

// Boundary pixels with the normal taken from a (2k+1)-wide window: the 3x3
// Sobel response of a binary image only has a handful of directions, which
// scatters center votes of large circles.
// Boundary pixels with the stroke normal from the principal axis of the ink
// in a (2k+1)^2 window. Sign is irrelevant since votes go both ways.
std::vector<EdgePixel> edge_pixels(const BinaryRaster& a, int k) {
  const int w = a.width(), h = a.height();
  std::vector<EdgePixel> out;
  for (int y = 0; y < h; ++y) {
    const auto* row = a.row_ptr(y);
    for (int x = 0; x < w; ++x) {
      if (!row[x]) continue;
      if (a.get(x - 1, y) && a.get(x + 1, y) && a.get(x, y - 1) && a.get(x, y + 1)) continue;
      double m = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      for (int dy = std::max(-k, -y); dy <= std::min(k, h - 1 - y); ++dy) {
        const auto* r = a.row_ptr(y + dy);
        for (int dx = std::max(-k, -x); dx <= std::min(k, w - 1 - x); ++dx) {
          if (!r[x + dx]) continue;
          m += 1;
          sx += dx;
          sy += dy;
          sxx += dx * dx;
          syy += dy * dy;
          sxy += dx * dy;
        }
      }
      const double mx = sx / m, my = sy / m;
      const double cxx = sxx / m - mx * mx, cyy = syy / m - my * my, cxy = sxy / m - mx * my;
      if (cxx + cyy <= 0) continue;
      const double theta = 0.5 * std::atan2(2 * cxy, cxx - cyy);
      out.push_back({x, y, -std::sin(theta), std::cos(theta)});
    }
  }
  return out;
}

}  // namespace

std::vector<Circle> dedupe_circles(std::vector<Circle> circles) {
  std::sort(circles.begin(), circles.end(), [](const Circle& a, const Circle& b) {
    return std::tuple(-a.score, a.center.y, a.center.x, a.radius) <
           std::tuple(-b.score, b.center.y, b.center.x, b.radius);
  });
  std::vector<Circle> kept;
  for (const auto& c : circles) {
    const bool dup = std::any_of(kept.begin(), kept.end(), [&](const Circle& k) {
      return std::hypot(k.center.x - c.center.x, k.center.y - c.center.y) <= 3.0 && std::abs(k.radius - c.radius) <= 2;
    });
    if (!dup) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end(), [](const Circle& a, const Circle& b) {
    return std::tuple(a.center.y, a.center.x, a.radius) < std::tuple(b.center.y, b.center.x, b.radius);
  });
  return kept;
}

std::vector<Circle> detect_circles(const BinaryRaster& a, const ShapeConfig& cfg) {
  cfg.validate();
  const int rmin = cfg.radius_min(a.width(), a.height());
  const int rmax = cfg.radius_max(a.width(), a.height());
  // Straight runs longer than any circle's flat stretch are pipes or box edges.
  const BinaryRaster lines = logical_or(open(a, {Orientation::horizontal, rmax}), open(a, {Orientation::vertical, rmax}));
  const BinaryRaster curved = subtract(a, lines);
  const auto edges = edge_pixels(curved, std::clamp(rmin / 4, 2, 8));

  const int psize = 4 * rmax;
  const auto layout = patch_layout(a.width(), a.height(), psize, 0.5);
  const double vote_floor = cfg.hough_vote_min * 2 * kPi * rmin;

  // Bucket edge pixels by patch-sized cells to avoid rescanning all edges.
  std::vector<Circle> found;
  std::vector<int> acc;
  std::vector<int> box;
  for (const auto& patch : layout) {
    const Rect& R = patch.region;
    acc.assign(static_cast<std::size_t>(R.w) * R.h, 0);
    bool any = false;
    for (const auto& e : edges) {
      if (!R.contains(e.x, e.y)) continue;
      any = true;
      for (int r = rmin; r <= rmax; ++r) {
        for (int sgn : {-1, 1}) {
          const int cx = static_cast<int>(std::lround(e.x + sgn * r * e.ux)) - R.x;
          const int cy = static_cast<int>(std::lround(e.y + sgn * r * e.uy)) - R.y;
          if (cx < 0 || cy < 0 || cx >= R.w || cy >= R.h) continue;
          ++acc[static_cast<std::size_t>(cy) * R.w + cx];
        }
      }
    }
    if (!any) continue;
    box.assign(acc.size(), 0);
    for (int y = 0; y < R.h; ++y)
      for (int x = 0; x < R.w; ++x) {
        int s = 0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = x + dx, yy = y + dy;
            if (xx >= 0 && yy >= 0 && xx < R.w && yy < R.h) s += acc[static_cast<std::size_t>(yy) * R.w + xx];
          }
        box[static_cast<std::size_t>(y) * R.w + x] = s;
      }
    struct Peak {
      int votes, x, y;
    };
    std::vector<Peak> peaks;
    for (int y = 0; y < R.h; ++y)
      for (int x = 0; x < R.w; ++x) {
        const int v = box[static_cast<std::size_t>(y) * R.w + x];
        if (v < vote_floor) continue;
        bool is_max = true;
        for (int dy = -3; dy <= 3 && is_max; ++dy)
          for (int dx = -3; dx <= 3 && is_max; ++dx) {
            const int xx = x + dx, yy = y + dy;
            if ((!dx && !dy) || xx < 0 || yy < 0 || xx >= R.w || yy >= R.h) continue;
            const int u = box[static_cast<std::size_t>(yy) * R.w + xx];
            // Plateaus resolve to their first pixel in raster order.
            if (u > v || (u == v && std::tie(yy, xx) < std::tie(y, x))) is_max = false;
          }
        if (is_max) peaks.push_back({v, x + R.x, y + R.y});
      }
    std::sort(peaks.begin(), peaks.end(),
              [](const Peak& p, const Peak& q) { return std::tie(q.votes, p.y, p.x) < std::tie(p.votes, q.y, q.x); });
    std::vector<Peak> chosen;
    for (const auto& p : peaks) {
      if (chosen.size() >= 64) break;
      const bool near = std::any_of(chosen.begin(), chosen.end(),
                                    [&](const Peak& q) { return std::hypot(p.x - q.x, p.y - q.y) < rmin / 2.0; });
      if (!near) chosen.push_back(p);
    }
    for (const auto& p : chosen) {
      int best_r = -1;
      double best = 0.0;
      for (int r = rmin; r <= rmax; ++r) {
        const double s = ring_score(a, p.x, p.y, r);
        if (s > best) {
          best = s;
          best_r = r;
        }
      }
      if (best_r < 0) continue;
      int cx = p.x, cy = p.y, cr = best_r;
      for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx)
          for (int r = std::max(rmin, best_r - 2); r <= std::min(rmax, best_r + 2); ++r) {
            const double s = ring_score(a, p.x + dx, p.y + dy, r);
            if (s > best + 1e-9) {
              best = s;
              cx = p.x + dx;
              cy = p.y + dy;
              cr = r;
            }
          }
      const double support = circle_support(a, cx, cy, cr);
      if (support >= cfg.hough_vote_min) found.push_back({{cx, cy}, cr, support});
    }
  }
  return dedupe_circles(std::move(found));
}

// ---------------------------------------------------------------------------
// Rectangles

std::vector<Point> sample_rect_vertices(const BinaryRaster& hlines, const BinaryRaster& vlines) {
  const auto both = logical_and(dilate_square(hlines, 2), dilate_square(vlines, 2));
  std::vector<Point> out;
  for (const auto& c : connected_components(both)) {
    out.push_back({static_cast<int>(std::lround(c.centroid_x())), static_cast<int>(std::lround(c.centroid_y()))});
  }
  std::sort(out.begin(), out.end(), [](Point p, Point q) { return std::tie(p.y, p.x) < std::tie(q.y, q.x); });
  return out;
}

double edge_support(const BinaryRaster& a, Point from, Point to) {
  const bool horiz = std::abs(to.x - from.x) >= std::abs(to.y - from.y);
  const int n = std::max(std::abs(to.x - from.x), std::abs(to.y - from.y));
  if (n == 0) return a.get(from.x, from.y) ? 1.0 : 0.0;
  int hits = 0;
  for (int i = 0; i <= n; ++i) {
    const int x = static_cast<int>(std::lround(from.x + (to.x - from.x) * static_cast<double>(i) / n));
    const int y = static_cast<int>(std::lround(from.y + (to.y - from.y) * static_cast<double>(i) / n));
    bool hit = false;
    for (int o = -1; o <= 1 && !hit; ++o) hit = horiz ? a.get(x, y + o) : a.get(x + o, y);
    hits += hit;
  }
  return static_cast<double>(hits) / (n + 1);
}

std::vector<RectShape> verify_rectangles(const std::vector<Point>& vertices, const BinaryRaster& a,
                                         const ShapeConfig& cfg) {
  cfg.validate();
  const int longest = std::max(a.width(), a.height());
  const int min_side = std::max(2, static_cast<int>(std::lround(cfg.rect_min_side_fraction * longest)));
  const int max_side = static_cast<int>(std::lround(cfg.rect_max_side_fraction * longest));
  const int tol = cfg.corner_tolerance;
  std::vector<Point> v = vertices;
  std::sort(v.begin(), v.end(), [](Point p, Point q) { return std::tie(p.y, p.x) < std::tie(q.y, q.x); });
  v.erase(std::unique(v.begin(), v.end()), v.end());

  std::vector<RectShape> out;
  std::set<std::array<Point, 4>> seen;
  for (const Point tl : v) {
    std::vector<Point> trs, bls;
    for (const Point p : v) {
      const int dx = p.x - tl.x, dy = p.y - tl.y;
      if (std::abs(dy) <= tol && dx >= min_side && dx <= max_side) trs.push_back(p);
      if (std::abs(dx) <= tol && dy >= min_side && dy <= max_side) bls.push_back(p);
    }
    for (const Point tr : trs) {
      for (const Point bl : bls) {
        for (const Point br : v) {
          if (std::abs(br.x - tr.x) > tol || std::abs(br.y - bl.y) > tol) continue;
          if (br.y - tr.y < min_side || br.x - bl.x < min_side) continue;
          const std::array<Point, 4> corners{tl, tr, br, bl};
          if (!seen.insert(corners).second) continue;
          RectShape rs{corners, {edge_support(a, tl, tr), edge_support(a, tr, br), edge_support(a, bl, br),
                                 edge_support(a, tl, bl)}};
          if (std::all_of(rs.edge_support.begin(), rs.edge_support.end(),
                          [&](double s) { return s >= cfg.rect_edge_support_min; })) {
            out.push_back(rs);
          }
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rule table

namespace {

template <typename E>
struct EnumNames {
  std::vector<std::pair<E, const char*>> entries;
  E parse(const std::string& s, const char* what) const {
    for (const auto& [e, n] : entries)
      if (s == n) return e;
    throw ConfigError(std::string("rule table: unknown ") + what + " '" + s + "'");
  }
  const char* name(E e) const {
    for (const auto& [k, n] : entries)
      if (k == e) return n;
    return "?";
  }
};

const EnumNames<CompositionRule::Shapes> kShapeNames{{{CompositionRule::Shapes::circle, "circle"},
                                                      {CompositionRule::Shapes::rect, "rect"},
                                                      {CompositionRule::Shapes::circle_rect, "circle+rect"}}};
const EnumNames<CompositionRule::Relation> kRelationNames{{{CompositionRule::Relation::any, "any"},
                                                           {CompositionRule::Relation::no_chord, "no_chord"},
                                                           {CompositionRule::Relation::horizontal_chord, "horizontal_chord"},
                                                           {CompositionRule::Relation::inscribed, "inscribed"},
                                                           {CompositionRule::Relation::tangent_above, "tangent_above"}}};
const EnumNames<CompositionRule::TextReq> kTextNames{{{CompositionRule::TextReq::any, "any"},
                                                      {CompositionRule::TextReq::inside, "inside"},
                                                      {CompositionRule::TextReq::none, "none"},
                                                      {CompositionRule::TextReq::above_chord, "above_chord"}}};

}  // namespace

int CompositionRule::weight() const {
  int w = shapes == Shapes::circle_rect ? 2 : 1;
  w += relation != Relation::any;
  w += text != TextReq::any;
  w += !text_regex.empty();
  return w;
}

RuleTable RuleTable::defaults() {
  using R = CompositionRule;
  return {{
      {26, R::Shapes::circle, R::Relation::no_chord, R::TextReq::inside, "^P[A-Z]* [0-9]+$"},
      {27, R::Shapes::circle, R::Relation::no_chord, R::TextReq::inside, "^[A-OQ-Z][A-Z]* [0-9]+$"},
      {28, R::Shapes::circle, R::Relation::horizontal_chord, R::TextReq::above_chord, ""},
      {29, R::Shapes::rect, R::Relation::any, R::TextReq::inside, ""},
      {30, R::Shapes::rect, R::Relation::any, R::TextReq::none, ""},
      {31, R::Shapes::circle_rect, R::Relation::inscribed, R::TextReq::inside, ""},
      {32, R::Shapes::circle_rect, R::Relation::tangent_above, R::TextReq::none, ""},
  }};
}

RuleTable RuleTable::from_json(const std::string& json_text) {
  RuleTable t;
  try {
    const auto j = nlohmann::json::parse(json_text);
    for (const auto& r : j.at("rules")) {
      CompositionRule rule;
      rule.class_id = r.at("class_id").get<int>();
      if (!is_basic_class(rule.class_id)) throw ConfigError("rule table: class_id must be a basic-shape class");
      rule.shapes = kShapeNames.parse(r.at("shapes").get<std::string>(), "shapes");
      rule.relation = kRelationNames.parse(r.value("relation", std::string("any")), "relation");
      rule.text = kTextNames.parse(r.value("text", std::string("any")), "text requirement");
      rule.text_regex = r.value("text_regex", std::string());
      if (!rule.text_regex.empty()) {
        try {
          std::regex re(rule.text_regex);
        } catch (const std::regex_error& e) {
          throw ConfigError("rule table: bad regex '" + rule.text_regex + "': " + e.what());
        }
      }
      t.rules.push_back(rule);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("rule table: ") + e.what());
  }
  return t;
}

RuleTable RuleTable::load(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return from_json(std::string(bytes.begin(), bytes.end()));
}

std::string RuleTable::to_json() const {
  nlohmann::json j;
  j["rules"] = nlohmann::json::array();
  for (const auto& r : rules) {
    nlohmann::json e{{"class_id", r.class_id},
                     {"shapes", kShapeNames.name(r.shapes)},
                     {"relation", kRelationNames.name(r.relation)},
                     {"text", kTextNames.name(r.text)}};
    if (!r.text_regex.empty()) e["text_regex"] = r.text_regex;
    j["rules"].push_back(e);
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

struct Composition {
  int circle = -1;
  int rect = -1;
};

double rect_w(const RectShape& r) { return r.corners[1].x - r.corners[0].x; }
double rect_h(const RectShape& r) { return r.corners[3].y - r.corners[0].y; }

bool inscribed(const Circle& c, const RectShape& r) {
  const double cx = (r.corners[0].x + r.corners[2].x) / 2.0;
  const double cy = (r.corners[0].y + r.corners[2].y) / 2.0;
  const double tol = std::max(3.0, 0.12 * c.radius);
  return std::abs(c.center.x - cx) <= tol && std::abs(c.center.y - cy) <= tol &&
         std::abs(c.radius - std::min(rect_w(r), rect_h(r)) / 2.0) <= tol;
}

bool tangent_above(const Circle& c, const RectShape& r) {
  const double tol = std::max(3.0, 0.12 * c.radius);
  return std::abs(c.center.y + c.radius - r.corners[0].y) <= tol && c.center.x > r.corners[0].x &&
         c.center.x < r.corners[1].x && 2.0 * c.radius < rect_w(r);
}

std::optional<int> chord_y(const Circle& c, const std::vector<LineSegment>& lines) {
  const double tol = std::max(3.0, 0.1 * c.radius);
  for (const auto& l : lines) {
    if (l.orientation != Orientation::horizontal) continue;
    if (std::abs(l.perp() - c.center.y) <= tol && std::abs(l.mid_x() - c.center.x) <= 0.2 * c.radius &&
        l.length() >= 1.5 * c.radius) {
      return static_cast<int>(std::lround(l.perp()));
    }
  }
  return std::nullopt;
}

bool text_in_circle(const TextBox& t, const Circle& c) {
  return std::hypot(t.bbox.center_x() - (c.center.x + 0.5), t.bbox.center_y() - (c.center.y + 0.5)) < c.radius;
}

bool text_in_rect(const TextBox& t, const RectShape& r) {
  const Rect b = r.bbox();
  return b.contains(t.bbox.center_x(), t.bbox.center_y());
}

struct Match {
  int weight;
  Composition comp;
  int class_id;
  int text;  // -1 when none
};

}  // namespace

std::vector<SymbolInstance> assemble_basic_symbols(const std::vector<Circle>& circles,
                                                   const std::vector<RectShape>& rects,
                                                   const std::vector<LineSegment>& lines,
                                                   const std::vector<TextBox>& texts, const RuleTable& rules,
                                                   const BinaryRaster* ink) {
  std::vector<Composition> comps;
  for (int i = 0; i < static_cast<int>(circles.size()); ++i) comps.push_back({i, -1});
  for (int j = 0; j < static_cast<int>(rects.size()); ++j) comps.push_back({-1, j});
  for (int i = 0; i < static_cast<int>(circles.size()); ++i)
    for (int j = 0; j < static_cast<int>(rects.size()); ++j)
      if (inscribed(circles[i], rects[j]) || tangent_above(circles[i], rects[j])) comps.push_back({i, j});

  std::vector<std::regex> regexes;
  for (const auto& r : rules.rules) regexes.emplace_back(r.text_regex.empty() ? std::string(".*") : r.text_regex);

  std::vector<Match> matches;
  for (const auto& comp : comps) {
    const Circle* c = comp.circle >= 0 ? &circles[comp.circle] : nullptr;
    const RectShape* r = comp.rect >= 0 ? &rects[comp.rect] : nullptr;
    const auto kind = c && r ? CompositionRule::Shapes::circle_rect
                             : (c ? CompositionRule::Shapes::circle : CompositionRule::Shapes::rect);
    const auto chord = c ? chord_y(*c, lines) : std::nullopt;
    double cx, cy;
    if (c) {
      cx = c->center.x + 0.5;
      cy = c->center.y + 0.5;
    } else {
      cx = r->bbox().center_x();
      cy = r->bbox().center_y();
    }
    std::vector<int> inside;
    for (int k = 0; k < static_cast<int>(texts.size()); ++k) {
      if ((c && text_in_circle(texts[k], *c)) || (r && text_in_rect(texts[k], *r))) inside.push_back(k);
    }
    for (std::size_t ri = 0; ri < rules.rules.size(); ++ri) {
      const auto& rule = rules.rules[ri];
      if (rule.shapes != kind) continue;
      bool ok = true;
      switch (rule.relation) {
        case CompositionRule::Relation::any: break;
        case CompositionRule::Relation::no_chord: ok = !chord; break;
        case CompositionRule::Relation::horizontal_chord: ok = chord.has_value(); break;
        case CompositionRule::Relation::inscribed: ok = c && r && inscribed(*c, *r); break;
        case CompositionRule::Relation::tangent_above: ok = c && r && tangent_above(*c, *r); break;
      }
      if (!ok) continue;
      std::vector<int> eligible;
      for (int k : inside) {
        if (rule.text == CompositionRule::TextReq::above_chord && !(chord && texts[k].bbox.center_y() < *chord)) continue;
        if (!rule.text_regex.empty() && !std::regex_match(texts[k].text, regexes[ri])) continue;
        eligible.push_back(k);
      }
      int chosen = -1;
      double best = 1e18;
      for (int k : eligible) {
        const double d = std::hypot(texts[k].bbox.center_x() - cx, texts[k].bbox.center_y() - cy);
        if (d < best) {
          best = d;
          chosen = k;
        }
      }
      switch (rule.text) {
        case CompositionRule::TextReq::any: break;
        case CompositionRule::TextReq::none: ok = inside.empty(); chosen = -1; break;
        case CompositionRule::TextReq::inside:
        case CompositionRule::TextReq::above_chord: ok = chosen >= 0; break;
      }
      if (!rule.text_regex.empty() && chosen < 0) ok = false;
      if (ok) matches.push_back({rule.weight(), comp, rule.class_id, chosen});
    }
  }

  auto comp_size = [](const Composition& c) { return (c.circle >= 0) + (c.rect >= 0); };
  std::sort(matches.begin(), matches.end(), [&](const Match& a, const Match& b) {
    return std::tuple(-a.weight, -comp_size(a.comp), a.comp.circle, a.comp.rect, a.class_id) <
           std::tuple(-b.weight, -comp_size(b.comp), b.comp.circle, b.comp.rect, b.class_id);
  });

  std::vector<bool> circle_used(circles.size(), false), rect_used(rects.size(), false), text_used(texts.size(), false);
  std::vector<SymbolInstance> out;
  for (std::size_t i = 0; i < matches.size();) {
    // Group equal-weight matches on the same shapes.
    std::size_t j = i;
    while (j < matches.size() && matches[j].weight == matches[i].weight &&
           matches[j].comp.circle == matches[i].comp.circle && matches[j].comp.rect == matches[i].comp.rect) {
      ++j;
    }
    const Composition comp = matches[i].comp;
    const bool free = (comp.circle < 0 || !circle_used[comp.circle]) && (comp.rect < 0 || !rect_used[comp.rect]);
    std::vector<const Match*> group;
    if (free) {
      for (std::size_t k = i; k < j; ++k)
        if (matches[k].text < 0 || !text_used[matches[k].text]) group.push_back(&matches[k]);
    }
    if (!group.empty()) {
      Rect box;
      double score = 0.0;
      int parts = 0;
      if (comp.circle >= 0) {
        const Circle& c = circles[comp.circle];
        box = {c.center.x - c.radius, c.center.y - c.radius, 2 * c.radius + 1, 2 * c.radius + 1};
        score += c.score;
        ++parts;
        circle_used[comp.circle] = true;
      }
      if (comp.rect >= 0) {
        const RectShape& r = rects[comp.rect];
        box = parts ? unite(box, r.bbox()) : r.bbox();
        score += *std::min_element(r.edge_support.begin(), r.edge_support.end());
        ++parts;
        rect_used[comp.rect] = true;
      }
      if (ink) {
        // Tight ink bounds around the geometric estimate absorb stroke width.
        const Rect search = intersect(box.expanded(4), {0, 0, ink->width(), ink->height()});
        int x0 = search.right(), y0 = search.bottom(), x1 = -1, y1 = -1;
        for (int y = search.y; y < search.bottom(); ++y)
          for (int x = search.x; x < search.right(); ++x)
            if (ink->at(x, y)) {
              x0 = std::min(x0, x);
              x1 = std::max(x1, x);
              y0 = std::min(y0, y);
              y1 = std::max(y1, y);
            }
        if (x1 >= 0) box = {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
      }
      for (const Match* m : group) {
        SymbolInstance s;
        s.class_id = m->class_id;
        s.bbox = box;
        s.score = score / parts;
        s.embedded_text = m->text;
        if (m->text >= 0) {
          s.label = texts[m->text].text;
          text_used[m->text] = true;
        }
        if (group.size() > 1) {
          s.ambiguous = true;
          s.flags.push_back("ambiguous_composition");
        }
        out.push_back(std::move(s));
      }
    }
    i = j;
  }
  std::sort(out.begin(), out.end(), [](const SymbolInstance& a, const SymbolInstance& b) {
    return std::tuple(a.bbox.y, a.bbox.x, a.class_id) < std::tuple(b.bbox.y, b.bbox.x, b.class_id);
  });
  return out;
}

}  // namespace pidparse
