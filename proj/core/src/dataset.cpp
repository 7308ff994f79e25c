#include "pidparse/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <opencv2/imgproc.hpp>
#include <random>
#include <set>

#include "pidparse/draw.hpp"
#include "pidparse/error.hpp"
#include "pidparse/glyphs.hpp"
#include "pidparse/graph.hpp"
#include "pidparse/image_io.hpp"
#include "pidparse/parallel.hpp"
#include "pidparse/symbol_catalog.hpp"

namespace pidparse {

using nlohmann::json;

void GenConfig::validate() const {
  if (sheet_width < 1000) throw ConfigError("generator.sheet_width must be >= 1000");
  if (symbols_min < 0 || symbols_max < symbols_min) throw ConfigError("generator.symbols_per_sheet must be 0 <= min <= max");
  if (!(dashed_fraction >= 0.0 && dashed_fraction <= 1.0)) throw ConfigError("generator.dashed_fraction must lie in [0, 1]");
  if (noise.pixelation_factor < 1) throw ConfigError("generator.noise.pixelation_factor must be >= 1");
  if (noise.blur_sigma < 0) throw ConfigError("generator.noise.blur_sigma must be >= 0");
  if (!(noise.salt_pepper_rate >= 0.0 && noise.salt_pepper_rate <= 1.0)) {
    throw ConfigError("generator.noise.salt_pepper_rate must lie in [0, 1]");
  }
  if (count < 1) throw ConfigError("generator.count must be >= 1");
  if (split_train < 0 || split_test < 0 || split_train + split_test == 0) {
    throw ConfigError("generator.split_ratio must be two non-negative integers, not both zero");
  }
}

int GenConfig::sheet_height() const { return static_cast<int>(std::lround(sheet_width / std::sqrt(2.0))); }

std::uint64_t sheet_seed(std::uint64_t seed, int index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string sheet_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sheet_%04d", index);
  return buf;
}

// ---------------------------------------------------------------------------
// Noise

GrayRaster apply_noise(const GrayRaster& clean, const NoiseConfig& noise, std::uint64_t seed) {
  if (clean.empty()) return clean;
  cv::Mat img(clean.height(), clean.width(), CV_8UC1, const_cast<std::uint8_t*>(clean.data().data()));
  cv::Mat cur = img.clone();
  if (noise.pixelation_factor > 1) {
    cv::Mat small;
    const int f = noise.pixelation_factor;
    cv::resize(cur, small, cv::Size(std::max(1, cur.cols / f), std::max(1, cur.rows / f)), 0, 0, cv::INTER_AREA);
    cv::resize(small, cur, cur.size(), 0, 0, cv::INTER_NEAREST);
  }
  if (noise.blur_sigma > 0) cv::GaussianBlur(cur, cur, cv::Size(0, 0), noise.blur_sigma);
  GrayRaster out(clean.width(), clean.height(), std::vector<std::uint8_t>(cur.datastart, cur.dataend));
  if (noise.salt_pepper_rate > 0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double half = noise.salt_pepper_rate / 2;
    for (auto& v : out.data()) {
      const double p = u(rng);
      if (p < half) v = 0;
      else if (p < noise.salt_pepper_rate) v = 255;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generator

namespace {

struct Rng {
  std::mt19937_64 e;
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(e); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(e); }
  bool chance(double p) { return real(0.0, 1.0) < p; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1))];
  }
};

struct Pipe {
  Orientation o;
  int perp;
  int a0, a1;  // axis extent, inclusive
  LineStyle style;
  std::string label;
  std::vector<int> junctions;             // axis positions of attachments and ends
  std::vector<std::pair<int, int>> cuts;  // axis intervals removed by inline symbols
};

struct Item {
  Rect box;
  int owner;  // pipe index for pipes, -1 otherwise
};

struct PlacedText {
  std::string text;
  GrayRaster raster;
  Point at;
  Orientation o;
};

struct PlacedSymbol {
  int class_id;
  int rotation;
  GrayRaster raster;
  Point at;
  std::string label;
  int pipe;  // owning pipe for inline symbols, -1 otherwise
};

class Layout {
 public:
  Layout(const GenConfig& cfg, int index)
      : cfg_(cfg), W_(cfg.sheet_width), H_(cfg.sheet_height()), rng_{std::mt19937_64(sheet_seed(cfg.seed, index))} {
    thick_ = std::max(1, static_cast<int>(std::lround(W_ / 2400.0)));
    kernel_ = LineDetectConfig{}.kernel_length(W_, H_);
    glyph_scale_ = glyph_scale_for_width(W_);
    glyph_h_ = GlyphAtlas::kCellHeight * glyph_scale_;
    text_clear_ = 2 * glyph_h_;
    complex_size_ = complex_symbol_size(W_);
    basic_size_ = basic_symbol_size(W_);
    index_ = index;
  }

  GeneratedSheet run() {
    build_pipes();
    place_symbols();
    return render();
  }

 private:
  int frac(double f) const { return static_cast<int>(std::lround(f * W_)); }

  bool free(const Rect& r, int clearance, int ignore_owner = -2) const {
    if (r.x < margin() || r.y < margin() || r.right() > W_ - margin() || r.bottom() > H_ - margin()) return false;
    const Rect grown = r.expanded(clearance);
    for (const auto& it : items_) {
      if (it.owner >= 0 && it.owner == ignore_owner) continue;
      if (!intersect(grown, it.box).empty()) return false;
    }
    return true;
  }

  int margin() const { return frac(0.03); }

  Rect pipe_rect(const Pipe& p) const {
    const int h = thick_ / 2;
    return p.o == Orientation::horizontal ? Rect{p.a0, p.perp - h, p.a1 - p.a0 + 1, thick_}
                                          : Rect{p.perp - h, p.a0, thick_, p.a1 - p.a0 + 1};
  }

  std::string unique(const std::function<std::string()>& make) {
    for (int i = 0; i < 1000; ++i) {
      std::string s = make();
      if (used_labels_.insert(s).second) return s;
    }
    throw Error("generator: label space exhausted");
  }

  std::string pipe_label() {
    static const std::vector<std::string> sizes{"1", "2", "3", "4", "6", "8", "10", "12"};
    static const std::vector<std::string> codes{"PL", "CW", "ST", "HW", "FW", "GS", "AR", "NG", "SW", "VT"};
    return unique([&] { return rng_.pick(sizes) + "\"-" + rng_.pick(codes) + "-" + std::to_string(rng_.uniform(1000, 9999)); });
  }

  std::string symbol_label(int c) {
    auto num = [&](int lo, int hi) { return std::to_string(rng_.uniform(lo, hi)); };
    static const std::vector<std::string> valve{"XV", "HV", "FV", "PV", "LV", "TV"};
    static const std::vector<std::string> p_tags{"PI", "PT", "PG", "PDI", "PIC"};
    static const std::vector<std::string> other_tags{"TI", "TT", "FI", "FT", "LI", "LT", "AI"};
    static const std::vector<std::string> ctl{"FC", "LC", "TC", "PC"};
    return unique([&]() -> std::string {
      if (is_complex_class(c)) return rng_.pick(valve) + "-" + num(100, 999);
      switch (c) {
        case 26: return rng_.pick(p_tags) + " " + num(1, 999);
        case 27: return rng_.pick(other_tags) + " " + num(1, 999);
        case 28: return rng_.pick(ctl) + " " + num(1, 999);
        case 29: return "TK " + num(1, 999);
        case 30: return "E-" + num(100, 999);
        case 31: return "HS " + num(1, 99);
        default: return "M-" + num(100, 999);
      }
    });
  }

  // -------------------------------------------------------------------------
  // Pipes: horizontal mains, vertical connectors between neighbouring mains,
  // and dead-end vertical stubs.

  void add_pipe(Pipe p) {
    p.style = rng_.chance(cfg_.dashed_fraction) ? LineStyle::dashed : LineStyle::solid;
    p.label = pipe_label();
    p.junctions.push_back(p.a0);
    p.junctions.push_back(p.a1);
    pipes_.push_back(std::move(p));
  }

  void build_pipes() {
    const int mains = rng_.uniform(3, 5);
    const int top = margin() + frac(0.04), bottom = H_ - margin() - frac(0.04);
    const double slot = static_cast<double>(bottom - top) / mains;
    std::vector<int> ys;
    for (int i = 0; i < mains; ++i) ys.push_back(static_cast<int>(top + slot * (i + 0.5 + rng_.real(-0.12, 0.12))));
    for (int i = 0; i < mains; ++i) {
      const int x0 = margin() + frac(0.01) + rng_.uniform(0, frac(0.08));
      const int x1 = W_ - margin() - frac(0.01) - rng_.uniform(0, frac(0.08));
      add_pipe({Orientation::horizontal, ys[i], x0, x1, LineStyle::solid, "", {}, {}});
    }
    const int spacing = frac(0.09);
    std::vector<std::vector<int>> taken(mains);  // x positions attached to each main
    auto clear_of = [&](int m, int x) {
      return std::all_of(taken[m].begin(), taken[m].end(), [&](int t) { return std::abs(t - x) >= spacing; });
    };
    for (int i = 0; i + 1 < mains; ++i) {
      const int lo = std::max(pipes_[i].a0, pipes_[i + 1].a0) + frac(0.05);
      const int hi = std::min(pipes_[i].a1, pipes_[i + 1].a1) - frac(0.05);
      const int want = rng_.uniform(1, 3);
      for (int k = 0, tries = 0; k < want && tries < 50; ++tries) {
        const int x = rng_.uniform(lo, hi);
        if (!clear_of(i, x) || !clear_of(i + 1, x)) continue;
        taken[i].push_back(x);
        taken[i + 1].push_back(x);
        pipes_[i].junctions.push_back(x);
        pipes_[i + 1].junctions.push_back(x);
        add_pipe({Orientation::vertical, x, ys[i], ys[i + 1], LineStyle::solid, "", {}, {}});
        ++k;
      }
    }
    for (int i = 0; i < mains; ++i) {
      const int want = rng_.uniform(0, 2);
      for (int k = 0, tries = 0; k < want && tries < 50; ++tries) {
        const int x = rng_.uniform(pipes_[i].a0 + frac(0.05), pipes_[i].a1 - frac(0.05));
        if (!clear_of(i, x)) continue;
        const bool up = i == 0 ? true : (i == mains - 1 ? false : rng_.chance(0.5));
        const int room = up ? ys[i] - (i == 0 ? top - frac(0.02) : ys[i - 1]) : (i == mains - 1 ? bottom + frac(0.02) : ys[i + 1]) - ys[i];
        const int len = std::min(rng_.uniform(frac(0.05), frac(0.09)), room - frac(0.05));
        if (len < frac(0.04)) continue;
        taken[i].push_back(x);
        pipes_[i].junctions.push_back(x);
        if (up) add_pipe({Orientation::vertical, x, ys[i] - len, ys[i], LineStyle::solid, "", {}, {}});
        else add_pipe({Orientation::vertical, x, ys[i], ys[i] + len, LineStyle::solid, "", {}, {}});
        ++k;
      }
    }
    for (std::size_t i = 0; i < pipes_.size(); ++i) items_.push_back({pipe_rect(pipes_[i]), static_cast<int>(i)});
  }

  // -------------------------------------------------------------------------
  // Symbols and texts

  Rect text_rect(const std::string& s, Orientation o, Point at) const {
    const int w = text_width_units(s) * glyph_scale_, h = glyph_h_;
    return o == Orientation::horizontal ? Rect{at.x, at.y, w, h} : Rect{at.x, at.y, h, w};
  }

  void add_text(const std::string& s, Orientation o, Point at) {
    GrayRaster r = render_text(s, glyph_scale_);
    if (o == Orientation::vertical) r = rotate_cw(r, 3);
    items_.push_back({text_rect(s, o, at), -1});
    texts_.push_back({s, std::move(r), at, o});
  }

  bool place_inline(int c) {
    const int S = complex_size_;
    std::vector<int> solid;
    for (std::size_t i = 0; i < pipes_.size(); ++i)
      if (pipes_[i].style == LineStyle::solid) solid.push_back(static_cast<int>(i));
    if (solid.empty()) return false;
    for (int attempt = 0; attempt < 200; ++attempt) {
      const int pi = rng_.pick(solid);
      Pipe& p = pipes_[pi];
      const int keep = frac(0.04);
      if (p.a1 - p.a0 < 2 * keep + S) continue;
      const int pos = rng_.uniform(p.a0 + keep, p.a1 - keep);
      if (std::any_of(p.junctions.begin(), p.junctions.end(), [&](int j) { return std::abs(j - pos) < keep; })) continue;
      const int axis0 = pos - S / 2;
      const int perp0 = static_cast<int>(std::lround(p.perp + 0.5 - S * 0.5));
      const bool h = p.o == Orientation::horizontal;
      const Rect canvas = h ? Rect{axis0, perp0, S, S} : Rect{perp0, axis0, S, S};
      if (!free(canvas, frac(0.015), pi)) continue;
      const int rotation = h ? (rng_.chance(0.5) ? 0 : 180) : (rng_.chance(0.5) ? 90 : 270);
      GrayRaster raster = render_symbol(c, S, rotation, false);
      const Rect ink = ink_bounds(raster);
      const std::string label = symbol_label(c);
      const int tw = text_width_units(label) * glyph_scale_;
      // Beside a vertical pipe the label shares rows with the actuator, so it
      // keeps a word gap from the ink.
      const Point tat = h ? Point{canvas.x + (S - tw) / 2, canvas.y + ink.y - 8 - glyph_h_}
                          : Point{canvas.x + ink.right() + text_clear_, canvas.y + (S - glyph_h_) / 2};
      const Rect tr = text_rect(label, Orientation::horizontal, tat);
      if (!free(tr, text_clear_, pi)) {
        used_labels_.erase(label);
        continue;
      }
      p.cuts.emplace_back(axis0 + static_cast<int>(std::lround(0.04 * S)), axis0 + static_cast<int>(std::lround(0.96 * S)));
      p.junctions.push_back(pos);
      items_.push_back({canvas, -1});
      symbols_.push_back({c, rotation, std::move(raster), {canvas.x, canvas.y}, label, pi});
      add_text(label, Orientation::horizontal, tat);
      return true;
    }
    return false;
  }

  bool place_free(int c) {
    const int B = basic_size_;
    GrayRaster r = render_symbol(c, B, 0, false);
    const std::string label = symbol_label(c);
    const auto centre = embedded_text_center(c, B);
    if (centre) {
      const GrayRaster t = render_text(label, glyph_scale_);
      paste_ink(r, t, static_cast<int>(std::lround(centre->first - t.width() / 2.0)),
                static_cast<int>(std::lround(centre->second - t.height() / 2.0)));
    }
    const Rect ink = ink_bounds(r);
    for (int attempt = 0; attempt < 300; ++attempt) {
      const Point at{rng_.uniform(margin(), W_ - margin() - B), rng_.uniform(margin(), H_ - margin() - B)};
      const Rect box{at.x + ink.x, at.y + ink.y, ink.w, ink.h};
      if (!free(box, frac(0.02))) continue;
      Point tat;
      if (!centre) {
        const int tw = text_width_units(label) * glyph_scale_;
        tat = {box.x + (box.w - tw) / 2, box.bottom() + 10};
        if (!free(text_rect(label, Orientation::horizontal, tat), text_clear_)) continue;
      }
      items_.push_back({box, -1});
      symbols_.push_back({c, 0, r, at, label, -1});
      if (centre) {
        const GrayRaster t = render_text(label, glyph_scale_);
        const Point tp{at.x + static_cast<int>(std::lround(centre->first - t.width() / 2.0)),
                       at.y + static_cast<int>(std::lround(centre->second - t.height() / 2.0))};
        texts_.push_back({label, t, tp, Orientation::horizontal});
      } else {
        add_text(label, Orientation::horizontal, tat);
      }
      return true;
    }
    used_labels_.erase(label);
    return false;
  }

  // Label near the pipe: above horizontal pipes, to the right of vertical ones
  // (reading bottom to top), with the other side as fallback.
  void place_pipe_label(int pi) {
    const Pipe& p = pipes_[pi];
    const int len = text_width_units(p.label) * glyph_scale_;
    const int gap = glyph_h_ / 2 + thick_;
    for (int attempt = 0; attempt < 60; ++attempt) {
      const int lo = p.a0, hi = p.a1 - len;
      if (hi <= lo) break;
      const int start = rng_.uniform(lo, hi);
      const bool flip = attempt % 2 == 1;
      Point at;
      Orientation o;
      if (p.o == Orientation::horizontal) {
        o = Orientation::horizontal;
        at = {start, flip ? p.perp + gap : p.perp - gap - glyph_h_};
      } else {
        o = Orientation::vertical;
        at = {flip ? p.perp - gap - glyph_h_ : p.perp + gap, start};
      }
      if (!free(text_rect(p.label, o, at), text_clear_, pi)) continue;
      add_text(p.label, o, at);
      return;
    }
    warnings_.push_back("no room for label of pipe " + p.label);
  }

  void place_symbols() {
    const int n = rng_.uniform(cfg_.symbols_min, cfg_.symbols_max);
    const int start = (index_ * 11) % kClassCount;
    std::vector<int> complex, basic;
    for (int j = 0; j < n; ++j) {
      const int c = (start + j) % kClassCount + 1;
      (is_complex_class(c) ? complex : basic).push_back(c);
    }
    int skipped = 0;
    for (int c : complex)
      if (!place_inline(c)) ++skipped;
    for (std::size_t i = 0; i < pipes_.size(); ++i) place_pipe_label(static_cast<int>(i));
    for (int c : basic)
      if (!place_free(c)) ++skipped;
    if (skipped) warnings_.push_back("sheet too crowded: placed " + std::to_string(n - skipped) + " of " +
                                     std::to_string(n) + " symbols");
  }

  // -------------------------------------------------------------------------
  // Rendering and truth

  std::vector<std::pair<int, int>> pieces(const Pipe& p) const {
    auto cuts = p.cuts;
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::pair<int, int>> out;
    int from = p.a0;
    for (const auto& [c0, c1] : cuts) {
      out.emplace_back(from, c0);
      from = c1;
    }
    out.emplace_back(from, p.a1);
    return out;
  }

  void draw_piece(GrayRaster& img, const Pipe& p, int a0, int a1) const {
    const int h = thick_ / 2;
    auto span = [&](int s0, int s1) {
      if (p.o == Orientation::horizontal) fill_rect(img, {s0, p.perp - h, s1 - s0 + 1, thick_});
      else fill_rect(img, {p.perp - h, s0, thick_, s1 - s0 + 1});
    };
    if (p.style == LineStyle::solid) {
      span(a0, a1);
      return;
    }
    const double dash = std::round(2.2 * kernel_), gap = std::round(1.3 * kernel_);
    const double length = a1 - a0 + 1;
    const int n = std::max(2, static_cast<int>(std::lround((length + gap) / (dash + gap))));
    const double d = (length - (n - 1) * gap) / n;
    for (int i = 0; i < n; ++i) {
      const double s = a0 + i * (d + gap);
      span(static_cast<int>(std::lround(s)), static_cast<int>(std::lround(s + d)) - 1);
    }
  }

  GeneratedSheet render() {
    GeneratedSheet out;
    GrayRaster img(W_, H_, 255);
    SheetAnnotation& a = out.annotation;
    a.width = W_;
    a.height = H_;
    std::vector<LineSegment> truth_lines;
    std::vector<std::string> truth_labels;
    for (const auto& p : pipes_) {
      for (const auto& [s0, s1] : pieces(p)) {
        draw_piece(img, p, s0, s1);
        const LineSegment seg = make_segment(p.o, s0, s1, p.perp, p.style);
        (p.o == Orientation::horizontal ? a.hlines : a.vlines).push_back({seg, p.label});
        truth_lines.push_back(seg);
        truth_labels.push_back(p.label);
      }
    }
    for (const auto& s : symbols_) {
      paste_ink(img, s.raster, s.at.x, s.at.y);
      const Rect ink = ink_bounds(s.raster);
      AnnotatedSymbol as{s.class_id, {s.at.x + ink.x, s.at.y + ink.y, ink.w, ink.h}, s.label, "", s.rotation};
      if (s.pipe >= 0) {
        as.connected_pipeline_label = pipes_[s.pipe].label;
      } else {
        double best = 1e300;
        for (const auto& p : pipes_) {
          const Rect r = pipe_rect(p);
          const double d = point_segment_distance(as.bbox.center_x(), as.bbox.center_y(), {r.x, r.y},
                                                  {r.right() - 1, r.bottom() - 1});
          if (d < best) {
            best = d;
            as.connected_pipeline_label = p.label;
          }
        }
      }
      a.symbols.push_back(std::move(as));
    }
    for (const auto& t : texts_) {
      paste_ink(img, t.raster, t.at.x, t.at.y);
      const Rect ink = ink_bounds(t.raster);
      a.texts.push_back({t.text, {t.at.x + ink.x, t.at.y + ink.y, ink.w, ink.h}, t.o});
    }
    a.pipelines = truth_edges(truth_lines, truth_labels);
    a.warnings = warnings_;
    out.image = apply_noise(img, cfg_.noise, sheet_seed(cfg_.seed ^ 0x5A17ULL, index_));
    return out;
  }

  // Drawn pieces split where another piece ends on their interior.
  static std::vector<AnnotatedEdge> truth_edges(const std::vector<LineSegment>& lines,
                                                const std::vector<std::string>& labels) {
    struct Raw {
      Point a, b;
      LineStyle style;
      std::string label;
    };
    std::vector<Raw> raw;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto& l = lines[i];
      std::vector<int> cuts;
      for (std::size_t j = 0; j < lines.size(); ++j) {
        if (j == i) continue;
        for (Point e : {lines[j].p1, lines[j].p2}) {
          const bool on = l.orientation == Orientation::horizontal ? (e.y == l.p1.y && e.x > l.p1.x && e.x < l.p2.x)
                                                                   : (e.x == l.p1.x && e.y > l.p1.y && e.y < l.p2.y);
          if (on) cuts.push_back(l.orientation == Orientation::horizontal ? e.x : e.y);
        }
      }
      std::sort(cuts.begin(), cuts.end());
      cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
      int from = l.axis_start();
      cuts.push_back(l.axis_end());
      for (int c : cuts) {
        const auto s = make_segment(l.orientation, from, c, static_cast<int>(l.perp()), l.style);
        raw.push_back({s.p1, s.p2, l.style, labels[i]});
        from = c;
      }
    }
    std::sort(raw.begin(), raw.end(), [](const Raw& p, const Raw& q) { return std::tie(p.a, p.b) < std::tie(q.a, q.b); });
    std::vector<AnnotatedEdge> out;
    std::map<Point, std::vector<int>> at;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      out.push_back({raw[i].a, raw[i].b, raw[i].style, raw[i].label, {}});
      at[raw[i].a].push_back(static_cast<int>(i));
      at[raw[i].b].push_back(static_cast<int>(i));
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
      std::set<int> adj;
      for (Point v : {out[i].p1, out[i].p2})
        for (int j : at[v])
          if (j != static_cast<int>(i)) adj.insert(j);
      out[i].adjacent.assign(adj.begin(), adj.end());
    }
    return out;
  }

  const GenConfig& cfg_;
  int W_, H_;
  Rng rng_;
  int thick_ = 3, kernel_ = 7, glyph_scale_ = 3, glyph_h_ = 21, text_clear_ = 42;
  int complex_size_ = 86, basic_size_ = 215;
  int index_ = 0;
  std::vector<Pipe> pipes_;
  std::vector<Item> items_;
  std::vector<PlacedSymbol> symbols_;
  std::vector<PlacedText> texts_;
  std::set<std::string> used_labels_;
  std::vector<std::string> warnings_;
};

}  // namespace

GeneratedSheet generate_sheet(const GenConfig& cfg, int index) {
  cfg.validate();
  if (index < 0) throw ConfigError("sheet index must be >= 0");
  return Layout(cfg, index).run();
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json rect_json(const Rect& r) { return json::array({r.x, r.y, r.w, r.h}); }
Rect rect_from(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<int>()}; }
json point_json(Point p) { return json::array({p.x, p.y}); }
Point point_from(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

json line_json(const AnnotatedLine& l) {
  return {{"p1", point_json(l.segment.p1)},
          {"p2", point_json(l.segment.p2)},
          {"style", std::string(to_string(l.segment.style))},
          {"pipeline_label", l.pipeline_label}};
}

AnnotatedLine line_from(const json& j, Orientation o) {
  AnnotatedLine l;
  l.segment.p1 = point_from(j.at("p1"));
  l.segment.p2 = point_from(j.at("p2"));
  l.segment.orientation = o;
  l.segment.style = line_style_from_string(j.at("style").get<std::string>());
  l.pipeline_label = j.value("pipeline_label", std::string());
  return l;
}

}  // namespace

std::string SheetAnnotation::to_json() const {
  json j;
  j["width"] = width;
  j["height"] = height;
  j["symbols"] = json::array();
  for (const auto& s : symbols) {
    j["symbols"].push_back({{"class_id", s.class_id},
                            {"bbox", rect_json(s.bbox)},
                            {"label", s.label},
                            {"connected_pipeline_label", s.connected_pipeline_label},
                            {"rotation", s.rotation}});
  }
  j["hlines"] = json::array();
  for (const auto& l : hlines) j["hlines"].push_back(line_json(l));
  j["vlines"] = json::array();
  for (const auto& l : vlines) j["vlines"].push_back(line_json(l));
  j["texts"] = json::array();
  for (const auto& t : texts) {
    j["texts"].push_back(
        {{"text", t.text}, {"bbox", rect_json(t.bbox)}, {"orientation", std::string(to_string(t.orientation))}});
  }
  j["pipelines"] = json::array();
  for (const auto& e : pipelines) {
    j["pipelines"].push_back({{"p1", point_json(e.p1)},
                              {"p2", point_json(e.p2)},
                              {"style", std::string(to_string(e.style))},
                              {"label", e.label},
                              {"adjacent", e.adjacent}});
  }
  j["warnings"] = warnings;
  return j.dump(1) + "\n";
}

SheetAnnotation SheetAnnotation::from_json(const std::string& text) {
  SheetAnnotation a;
  try {
    const auto j = json::parse(text);
    a.width = j.at("width").get<int>();
    a.height = j.at("height").get<int>();
    for (const auto& s : j.at("symbols")) {
      a.symbols.push_back({s.at("class_id").get<int>(), rect_from(s.at("bbox")), s.value("label", std::string()),
                           s.value("connected_pipeline_label", std::string()), s.value("rotation", 0)});
    }
    for (const auto& l : j.at("hlines")) a.hlines.push_back(line_from(l, Orientation::horizontal));
    for (const auto& l : j.at("vlines")) a.vlines.push_back(line_from(l, Orientation::vertical));
    for (const auto& t : j.at("texts")) {
      a.texts.push_back({t.at("text").get<std::string>(), rect_from(t.at("bbox")),
                         orientation_from_string(t.value("orientation", std::string("horizontal")))});
    }
    for (const auto& e : j.value("pipelines", json::array())) {
      a.pipelines.push_back({point_from(e.at("p1")), point_from(e.at("p2")),
                             line_style_from_string(e.at("style").get<std::string>()), e.value("label", std::string()),
                             e.value("adjacent", std::vector<int>{})});
    }
    a.warnings = j.value("warnings", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("annotation: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("annotation: ") + e.what());
  }
  return a;
}

SheetAnnotation SheetAnnotation::load(const std::filesystem::path& path) {
  const auto b = read_file_bytes(path);
  return from_json(std::string(b.begin(), b.end()));
}

GenConfig gen_config_from_json(const std::string& text) {
  GenConfig c;
  try {
    const auto j = json::parse(text);
    const auto& g = j.contains("generator") ? j.at("generator") : j;
    c.seed = g.value("seed", c.seed);
    c.sheet_width = g.value("sheet_width", c.sheet_width);
    if (g.contains("symbols_per_sheet")) {
      c.symbols_min = g.at("symbols_per_sheet").at(0).get<int>();
      c.symbols_max = g.at("symbols_per_sheet").at(1).get<int>();
    }
    c.dashed_fraction = g.value("dashed_fraction", c.dashed_fraction);
    if (g.contains("noise")) {
      const auto& n = g.at("noise");
      c.noise.pixelation_factor = n.value("pixelation_factor", c.noise.pixelation_factor);
      c.noise.blur_sigma = n.value("blur_sigma", c.noise.blur_sigma);
      c.noise.salt_pepper_rate = n.value("salt_pepper_rate", c.noise.salt_pepper_rate);
    }
    c.count = g.value("count", c.count);
    if (g.contains("split_ratio")) {
      c.split_train = g.at("split_ratio").at(0).get<int>();
      c.split_test = g.at("split_ratio").at(1).get<int>();
    }
    c.threads = g.value("threads", c.threads);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("generator config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string gen_config_to_json(const GenConfig& c) {
  json j{{"seed", c.seed},
         {"sheet_width", c.sheet_width},
         {"symbols_per_sheet", {c.symbols_min, c.symbols_max}},
         {"dashed_fraction", c.dashed_fraction},
         {"noise",
          {{"pixelation_factor", c.noise.pixelation_factor},
           {"blur_sigma", c.noise.blur_sigma},
           {"salt_pepper_rate", c.noise.salt_pepper_rate}}},
         {"count", c.count},
         {"split_ratio", {c.split_train, c.split_test}}};
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Dataset

DatasetSplit split_dataset(int count, int train, int test, std::uint64_t seed) {
  if (count < 0 || train < 0 || test < 0 || train + test == 0) throw ConfigError("invalid split");
  const int n_test = static_cast<int>(std::lround(static_cast<double>(count) * test / (train + test)));
  std::vector<int> order(count);
  for (int i = 0; i < count; ++i) order[i] = i;
  std::mt19937_64 rng(sheet_seed(seed, -1));
  for (int i = count - 1; i > 0; --i) std::swap(order[i], order[std::uniform_int_distribution<int>(0, i)(rng)]);
  DatasetSplit s;
  s.test.assign(order.begin(), order.begin() + n_test);
  s.train.assign(order.begin() + n_test, order.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

std::string write_dataset(const GenConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::error_code ec;
  for (const auto& d : {out_dir / "images", out_dir / "annotations"}) {
    std::filesystem::create_directories(d, ec);
    if (ec) throw IoError("cannot create " + d.string() + ": " + ec.message());
  }
  std::vector<std::string> warnings(cfg.count);
  parallel_for(static_cast<std::size_t>(cfg.count), resolve_threads(cfg.threads), [&](std::size_t i) {
    const int idx = static_cast<int>(i);
    const auto sheet = generate_sheet(cfg, idx);
    save_png(sheet.image, out_dir / "images" / (sheet_id(idx) + ".png"));
    const std::string text = sheet.annotation.to_json();
    write_file_bytes(out_dir / "annotations" / (sheet_id(idx) + ".json"),
                     std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  });
  const auto split = split_dataset(cfg.count, cfg.split_train, cfg.split_test, cfg.seed);
  std::set<int> test(split.test.begin(), split.test.end());
  json m;
  m["config"] = json::parse(gen_config_to_json(cfg));
  m["seed"] = cfg.seed;
  m["splits"] = {{"train", split.train}, {"test", split.test}};
  m["sheets"] = json::array();
  for (int i = 0; i < cfg.count; ++i) {
    m["sheets"].push_back({{"id", sheet_id(i)},
                           {"image", "images/" + sheet_id(i) + ".png"},
                           {"annotation", "annotations/" + sheet_id(i) + ".json"},
                           {"split", test.count(i) ? "test" : "train"}});
  }
  const std::string text = m.dump(2) + "\n";
  write_file_bytes(out_dir / "manifest.json", std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  return text;
}

}  // namespace pidparse
