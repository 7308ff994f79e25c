#include "pidparse/lines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "pidparse/components.hpp"
#include "pidparse/dbscan.hpp"
#include "pidparse/error.hpp"
#include "pidparse/hull.hpp"
#include "pidparse/morphology.hpp"

namespace pidparse {

double LineSegment::length() const {
  const double dx = p2.x - p1.x;
  const double dy = p2.y - p1.y;
  return std::sqrt(dx * dx + dy * dy);
}

LineSegment make_segment(Orientation o, int axis_from, int axis_to, int perp, LineStyle style) {
  if (axis_from > axis_to) std::swap(axis_from, axis_to);
  if (o == Orientation::horizontal) return {{axis_from, perp}, {axis_to, perp}, o, style};
  return {{perp, axis_from}, {perp, axis_to}, o, style};
}

void sort_segments(std::vector<LineSegment>& segments) {
  std::sort(segments.begin(), segments.end(), [](const LineSegment& a, const LineSegment& b) {
    return std::tuple(static_cast<int>(a.orientation), a.p1.y, a.p1.x, a.p2.y, a.p2.x,
                      static_cast<int>(a.style)) <
           std::tuple(static_cast<int>(b.orientation), b.p1.y, b.p1.x, b.p2.y, b.p2.x,
                      static_cast<int>(b.style));
  });
}

int LineDetectConfig::kernel_length(int width, int height) const {
  const int longest = std::max(width, height);
  return std::max(min_kernel, static_cast<int>(std::lround(kernel_fraction * longest)));
}

void LineDetectConfig::validate() const {
  if (!(kernel_fraction > 0.0 && kernel_fraction < 0.1)) {
    throw ConfigError("line.kernel_fraction must lie in (0, 0.1)");
  }
  if (min_kernel < 2) throw ConfigError("line.min_kernel must be >= 2");
  if (dash_jump_limit < 1) throw ConfigError("line.dash_jump_limit must be >= 1");
  if (dash_merge_eps <= 0.0) throw ConfigError("line.dash_merge_eps must be > 0");
  if (dash_merge_min_pts < 1) throw ConfigError("line.dash_merge_min_pts must be >= 1");
  if (min_dashes < 2) throw ConfigError("line.min_dashes must be >= 2");
  if (min_dashed_kernels < 0.0) throw ConfigError("line.min_dashed_kernels must be >= 0");
}

std::vector<LineSegment> segments_from_opened(const BinaryRaster& opened, Orientation o) {
  std::vector<LineSegment> out;
  for (const auto& comp : connected_components(opened, Connectivity::eight)) {
    const auto hull = convex_hull(comp.run_endpoints());
    const auto [lo, hi] = extreme_points_along(hull, o);
    const bool horiz = o == Orientation::horizontal;
    const int perp = static_cast<int>(std::lround(horiz ? comp.centroid_y() : comp.centroid_x()));
    out.push_back(make_segment(o, horiz ? lo.x : lo.y, horiz ? hi.x : hi.y, perp));
  }
  return out;
}

SolidLineDetection detect_solid_lines_detailed(const BinaryRaster& a, const LineDetectConfig& cfg) {
  cfg.validate();
  SolidLineDetection det;
  det.kernel_length = cfg.kernel_length(a.width(), a.height());
  det.horizontal = open(a, {Orientation::horizontal, det.kernel_length});
  det.vertical = open(a, {Orientation::vertical, det.kernel_length});
  det.segments = segments_from_opened(det.horizontal, Orientation::horizontal);
  auto vert = segments_from_opened(det.vertical, Orientation::vertical);
  det.segments.insert(det.segments.end(), vert.begin(), vert.end());
  sort_segments(det.segments);
  return det;
}

std::vector<LineSegment> detect_solid_lines(const BinaryRaster& a, const LineDetectConfig& cfg) {
  return detect_solid_lines_detailed(a, cfg).segments;
}

// ---------------------------------------------------------------------------
// Dashed lines

namespace {

constexpr double kCollinearTolerance = 2.0;
constexpr int kMinClusterSupport = 3;
constexpr double kGapTolerance = 0.5;
constexpr double kMinIsolatedShare = 0.6;

/// True when the ink blob under the segment stays within max_thickness across
/// the segment and does not run past its ends. Glyph bars fail: their strokes
/// are attached.
bool isolated_blob(const BinaryRaster& ink, const LineSegment& s, int max_thickness) {
  const bool h = s.orientation == Orientation::horizontal;
  const int perp = static_cast<int>(std::lround(s.perp()));
  const int a0 = s.axis_start(), a1 = s.axis_end();
  const int mid = (a0 + a1) / 2;
  auto pixel = [&](int axis, int p) { return h ? Point{axis, p} : Point{p, axis}; };
  Point seed{-1, -1};
  for (int d = 0; d <= max_thickness && seed.x < 0; ++d) {
    for (int p : {perp - d, perp + d}) {
      const Point q = pixel(mid, p);
      if (ink.get(q.x, q.y)) {
        seed = q;
        break;
      }
    }
  }
  if (seed.x < 0) return false;
  const int slack = 2;
  int lo_a = a0, hi_a = a1, lo_p = perp, hi_p = perp;
  std::vector<Point> stack{seed};
  std::vector<Point> seen{seed};
  auto visited = [&](Point q) { return std::find(seen.begin(), seen.end(), q) != seen.end(); };
  const std::size_t budget = static_cast<std::size_t>((a1 - a0 + 2 * slack + 1) * (max_thickness + 2 * slack + 1));
  while (!stack.empty()) {
    const Point q = stack.back();
    stack.pop_back();
    const int qa = h ? q.x : q.y, qp = h ? q.y : q.x;
    lo_a = std::min(lo_a, qa);
    hi_a = std::max(hi_a, qa);
    lo_p = std::min(lo_p, qp);
    hi_p = std::max(hi_p, qp);
    if (hi_p - lo_p + 1 > max_thickness || lo_a < a0 - slack || hi_a > a1 + slack) return false;
    if (seen.size() > budget) return false;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const Point n{q.x + dx, q.y + dy};
        if ((dx || dy) && ink.get(n.x, n.y) && !visited(n)) {
          seen.push_back(n);
          stack.push_back(n);
        }
      }
    }
  }
  return true;
}

struct DashFeature {
  double length;
  double gap;
};

struct FeatureCluster {
  double sum_len = 0.0;
  double sum_gap = 0.0;
  int n = 0;
  [[nodiscard]] double mean_len() const { return sum_len / n; }
  [[nodiscard]] double mean_gap() const { return sum_gap / n; }
};

// Groups indices (already one orientation) into rows of collinear segments.
std::vector<std::vector<std::size_t>> collinear_rows(std::span<const LineSegment> segs,
                                                     std::vector<std::size_t> idx) {
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::tuple(segs[a].perp(), segs[a].axis_start(), a) < std::tuple(segs[b].perp(), segs[b].axis_start(), b);
  });
  std::vector<std::vector<std::size_t>> rows;
  double anchor = 0.0;
  for (std::size_t i : idx) {
    if (rows.empty() || segs[i].perp() - anchor > kCollinearTolerance) {
      rows.emplace_back();
      anchor = segs[i].perp();
    }
    rows.back().push_back(i);
  }
  for (auto& row : rows) {
    std::sort(row.begin(), row.end(), [&](std::size_t a, std::size_t b) {
      return std::tuple(segs[a].axis_start(), segs[a].axis_end(), a) <
             std::tuple(segs[b].axis_start(), segs[b].axis_end(), b);
    });
  }
  return rows;
}

// Leader clustering over (length, gap), scanned in ascending length+gap.
std::vector<FeatureCluster> cluster_features(std::vector<DashFeature> feats) {
  std::sort(feats.begin(), feats.end(), [](const DashFeature& a, const DashFeature& b) {
    return std::tuple(a.length + a.gap, a.length) < std::tuple(b.length + b.gap, b.length);
  });
  std::vector<FeatureCluster> clusters;
  for (const auto& f : feats) {
    bool placed = false;
    for (auto& c : clusters) {
      if (std::abs(f.length - c.mean_len()) <= 0.3 * c.mean_len() + 1.0 &&
          std::abs(f.gap - c.mean_gap()) <= kGapTolerance * c.mean_gap() + 1.0) {
        c.sum_len += f.length;
        c.sum_gap += f.gap;
        ++c.n;
        placed = true;
        break;
      }
    }
    if (!placed) clusters.push_back({f.length, f.gap, 1});
  }
  return clusters;
}

struct Chain {
  std::vector<std::size_t> members;
  Orientation orientation;
  int start;
  int end;
  double perp_sum = 0.0;
  [[nodiscard]] double perp() const { return perp_sum / static_cast<double>(members.size()); }
};

}  // namespace

DashedLines detect_dashed_lines(std::span<const LineSegment> segments, int kernel_length,
                                const LineDetectConfig& cfg, const BinaryRaster* ink) {
  cfg.validate();
  DashedLines result;
  const double short_limit = 3.0 * kernel_length;

  std::vector<std::size_t> by_orient[2];
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].style != LineStyle::solid) continue;
    if (segments[i].length() >= short_limit) continue;
    by_orient[static_cast<int>(segments[i].orientation)].push_back(i);
  }

  // Dashes touching a crossing pipe are not isolated, so isolation gates the
  // rhythm and the share of a chain rather than each member.
  std::vector<bool> isolated(segments.size(), true);
  if (ink) {
    for (auto& idx : by_orient)
      for (std::size_t i : idx) isolated[i] = isolated_blob(*ink, segments[i], kernel_length);
  }

  std::vector<std::vector<std::size_t>> rows;
  for (auto& idx : by_orient) {
    auto r = collinear_rows(segments, idx);
    rows.insert(rows.end(), r.begin(), r.end());
  }

  // Rhythm estimate from consecutive collinear short segments.
  std::vector<DashFeature> feats;
  for (const auto& row : rows) {
    for (std::size_t k = 0; k + 1 < row.size(); ++k) {
      const auto& a = segments[row[k]];
      const auto& b = segments[row[k + 1]];
      const double gap = b.axis_start() - a.axis_end();
      const double len = a.length();
      if (gap <= 0.0 || len <= 0.0 || !isolated[row[k]] || !isolated[row[k + 1]]) continue;
      if (gap > 4.0 * std::max(len, b.length())) continue;
      feats.push_back({len, gap});
    }
  }
  const auto clusters = cluster_features(std::move(feats));
  const FeatureCluster* rhythm = nullptr;
  for (const auto& c : clusters) {
    if (c.n < kMinClusterSupport) continue;
    if (!rhythm || c.n > rhythm->n ||
        (c.n == rhythm->n && c.mean_len() + c.mean_gap() < rhythm->mean_len() + rhythm->mean_gap())) {
      rhythm = &c;
    }
  }
  if (!rhythm) return result;

  const double dash_len = rhythm->mean_len();
  const double dash_gap = rhythm->mean_gap();
  auto dash_like = [&](const LineSegment& s) {
    return s.length() <= 1.3 * dash_len + 1.0 && s.length() >= 0.7 * dash_len - 1.0;
  };
  auto gap_fits = [&](double gap) {
    for (int missing = 0; missing < cfg.dash_jump_limit; ++missing) {
      const double expected = (missing + 1) * dash_gap + missing * dash_len;
      if (std::abs(gap - expected) <= kGapTolerance * dash_gap) return true;
    }
    return false;
  };

  std::vector<Chain> chains;
  for (const auto& row : rows) {
    Chain cur{};
    auto flush = [&]() {
      if (cur.members.size() >= 2) chains.push_back(cur);
      cur = Chain{};
    };
    for (std::size_t i : row) {
      const auto& s = segments[i];
      if (!dash_like(s)) {
        flush();
        continue;
      }
      if (!cur.members.empty() && !gap_fits(s.axis_start() - cur.end)) flush();
      if (cur.members.empty()) {
        cur.orientation = s.orientation;
        cur.start = s.axis_start();
        cur.end = s.axis_end();
      }
      cur.members.push_back(i);
      cur.start = std::min(cur.start, s.axis_start());
      cur.end = std::max(cur.end, s.axis_end());
      cur.perp_sum += s.perp();
    }
    flush();
  }

  // Join chains whose facing endpoints are density-connected on a shared axis.
  std::vector<std::size_t> parent(chains.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int o = 0; o < 2; ++o) {
    std::vector<Vec2> pts;
    std::vector<std::size_t> owner;
    for (std::size_t c = 0; c < chains.size(); ++c) {
      if (static_cast<int>(chains[c].orientation) != o) continue;
      const double p = chains[c].perp();
      for (int end : {chains[c].start, chains[c].end}) {
        pts.push_back(o == 0 ? Vec2{static_cast<double>(end), p} : Vec2{p, static_cast<double>(end)});
        owner.push_back(c);
      }
    }
    const auto labels = dbscan(pts, cfg.dash_merge_eps, cfg.dash_merge_min_pts);
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] >= 0) groups[labels[i]].push_back(owner[i]);
    }
    for (const auto& [label, owners] : groups) {
      for (std::size_t a = 0; a < owners.size(); ++a) {
        for (std::size_t b = a + 1; b < owners.size(); ++b) {
          if (std::abs(chains[owners[a]].perp() - chains[owners[b]].perp()) <= kCollinearTolerance) {
            const auto ra = find(owners[a]);
            const auto rb = find(owners[b]);
            if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
          }
        }
      }
    }
  }

  std::map<std::size_t, Chain> merged;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const auto root = find(c);
    auto [it, fresh] = merged.try_emplace(root, chains[c]);
    if (fresh) continue;
    Chain& m = it->second;
    m.members.insert(m.members.end(), chains[c].members.begin(), chains[c].members.end());
    m.start = std::min(m.start, chains[c].start);
    m.end = std::max(m.end, chains[c].end);
    m.perp_sum += chains[c].perp_sum;
  }

  // Short runs of glyph bars inside labels chain up like dashes; real dashed pipes are long.
  const double min_extent = cfg.min_dashed_kernels * kernel_length;
  for (const auto& [root, m] : merged) {
    if (static_cast<int>(m.members.size()) < cfg.min_dashes || m.end - m.start < min_extent) continue;
    // Glyph bars skip glyphs; a dashed pipe keeps most of its dashes.
    const double expected = (m.end - m.start + dash_gap) / (dash_len + dash_gap);
    if (m.members.size() < 0.5 * expected) continue;
    const auto lone = std::count_if(m.members.begin(), m.members.end(), [&](std::size_t i) { return isolated[i]; });
    if (lone < kMinIsolatedShare * static_cast<double>(m.members.size())) continue;
    const int perp = static_cast<int>(std::lround(m.perp()));
    result.lines.push_back(make_segment(m.orientation, m.start, m.end, perp, LineStyle::dashed));
    result.consumed.insert(result.consumed.end(), m.members.begin(), m.members.end());
  }
  std::sort(result.consumed.begin(), result.consumed.end());
  sort_segments(result.lines);
  return result;
}

// ---------------------------------------------------------------------------
// Hough baseline

namespace {

// splitmix64; deterministic across platforms.
std::uint64_t mix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::vector<LineSegment> detect_lines_hough(const BinaryRaster& a, const HoughParams& params) {
  constexpr double kPi = 3.14159265358979323846;
  const int w = a.width();
  const int h = a.height();
  const int threshold = params.vote_threshold > 0 ? params.vote_threshold : 3 * params.kernel_length;
  const int min_length = params.min_length > 0 ? params.min_length : 2 * params.kernel_length;

  std::vector<double> angles;
  for (double base : {0.0, 90.0}) {
    for (double d = -params.angle_tolerance_deg; d <= params.angle_tolerance_deg + 1e-9; d += params.angle_step_deg) {
      angles.push_back((base + d) * kPi / 180.0);
    }
  }
  const int n_theta = static_cast<int>(angles.size());
  std::vector<double> cs(angles.size());
  std::vector<double> sn(angles.size());
  for (int t = 0; t < n_theta; ++t) {
    cs[t] = std::cos(angles[t]);
    sn[t] = std::sin(angles[t]);
  }
  const int rho_offset = w + h;
  const int n_rho = 2 * (w + h) + 1;
  std::vector<int> acc(static_cast<std::size_t>(n_theta) * n_rho, 0);
  auto rho_of = [&](int t, int x, int y) {
    return static_cast<int>(std::lround(x * cs[t] + y * sn[t])) + rho_offset;
  };

  std::vector<Point> pixels;
  for (int y = 0; y < h; ++y) {
    const auto* row = a.row_ptr(y);
    for (int x = 0; x < w; ++x) {
      if (row[x]) pixels.push_back({x, y});
    }
  }
  std::uint64_t state = params.seed;
  for (std::size_t i = pixels.size(); i > 1; --i) {
    std::swap(pixels[i - 1], pixels[mix(state) % i]);
  }

  // 0 = consumed/background, 1 = available, 2 = available and voted.
  std::vector<std::uint8_t> status(a.bits().begin(), a.bits().end());
  auto st = [&](int x, int y) -> std::uint8_t& { return status[static_cast<std::size_t>(y) * w + x]; };

  std::vector<LineSegment> out;
  for (const Point p : pixels) {
    if (st(p.x, p.y) == 0) continue;
    int best_t = -1;
    int best_votes = 0;
    for (int t = 0; t < n_theta; ++t) {
      const int v = ++acc[static_cast<std::size_t>(t) * n_rho + rho_of(t, p.x, p.y)];
      if (v > best_votes) {
        best_votes = v;
        best_t = t;
      }
    }
    st(p.x, p.y) = 2;
    if (best_votes < threshold) continue;

    // Walk along the peak line from p in both directions, tolerating short gaps.
    const double dx = -sn[best_t];
    const double dy = cs[best_t];
    const bool step_x = std::abs(dx) > std::abs(dy);
    const double ux = step_x ? (dx > 0 ? 1.0 : -1.0) : dx / std::abs(dy);
    const double uy = step_x ? dy / std::abs(dx) : (dy > 0 ? 1.0 : -1.0);
    Point ends[2] = {p, p};
    for (int dir = 0; dir < 2; ++dir) {
      const double sx = dir == 0 ? ux : -ux;
      const double sy = dir == 0 ? uy : -uy;
      int gap = 0;
      for (int k = 1;; ++k) {
        const int x = static_cast<int>(std::lround(p.x + sx * k));
        const int y = static_cast<int>(std::lround(p.y + sy * k));
        if (x < 0 || y < 0 || x >= w || y >= h) break;
        if (st(x, y) != 0) {
          gap = 0;
          ends[dir] = {x, y};
        } else if (++gap > params.max_gap) {
          break;
        }
      }
    }
    const double len = std::hypot(ends[1].x - ends[0].x, ends[1].y - ends[0].y);
    if (len < min_length) continue;

    // Consume the walked band and withdraw its votes.
    const int half = params.line_width / 2;
    const int steps = static_cast<int>(std::max(std::abs(ends[1].x - ends[0].x), std::abs(ends[1].y - ends[0].y)));
    for (int k = 0; k <= steps; ++k) {
      const double f = steps ? static_cast<double>(k) / steps : 0.0;
      const int cx = static_cast<int>(std::lround(ends[1].x + (ends[0].x - ends[1].x) * f));
      const int cy = static_cast<int>(std::lround(ends[1].y + (ends[0].y - ends[1].y) * f));
      for (int o = -half; o <= half; ++o) {
        const int x = step_x ? cx : cx + o;
        const int y = step_x ? cy + o : cy;
        if (x < 0 || y < 0 || x >= w || y >= h) continue;
        if (st(x, y) == 2) {
          for (int t = 0; t < n_theta; ++t) --acc[static_cast<std::size_t>(t) * n_rho + rho_of(t, x, y)];
        }
        st(x, y) = 0;
      }
    }
    const Orientation o = step_x ? Orientation::horizontal : Orientation::vertical;
    const int perp = static_cast<int>(std::lround(step_x ? (ends[0].y + ends[1].y) / 2.0 : (ends[0].x + ends[1].x) / 2.0));
    const int from = step_x ? std::min(ends[0].x, ends[1].x) : std::min(ends[0].y, ends[1].y);
    const int to = step_x ? std::max(ends[0].x, ends[1].x) : std::max(ends[0].y, ends[1].y);
    out.push_back(make_segment(o, from, to, perp));
  }
  sort_segments(out);
  return out;
}

std::vector<LineSegment> detect_lines(const BinaryRaster& ink, const LineDetectConfig& cfg) {
  return detect_lines(detect_solid_lines_detailed(ink, cfg), ink, cfg);
}

std::vector<LineSegment> detect_lines(const SolidLineDetection& solid, const BinaryRaster& ink,
                                      const LineDetectConfig& cfg) {
  const int k = cfg.kernel_length(ink.width(), ink.height());
  const auto dashed = detect_dashed_lines(solid.segments, k, cfg, &ink);
  std::vector<LineSegment> lines;
  std::size_t c = 0;
  for (std::size_t i = 0; i < solid.segments.size(); ++i) {
    if (c < dashed.consumed.size() && dashed.consumed[c] == i) {
      ++c;
      continue;
    }
    lines.push_back(solid.segments[i]);
  }
  lines.insert(lines.end(), dashed.lines.begin(), dashed.lines.end());
  sort_segments(lines);
  return lines;
}

}  // namespace pidparse
