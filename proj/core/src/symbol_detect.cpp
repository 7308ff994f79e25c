#include "pidparse/symbol_detect.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <opencv2/imgproc.hpp>
#include <tuple>

#include "pidparse/components.hpp"
#include "pidparse/draw.hpp"
#include "pidparse/error.hpp"
#include "pidparse/image_io.hpp"
#include "pidparse/morphology.hpp"
#include "pidparse/parallel.hpp"
#include "pidparse/symbol_catalog.hpp"

namespace pidparse {

namespace {

cv::Mat view(const GrayRaster& r) {
  return {r.height(), r.width(), CV_8UC1, const_cast<std::uint8_t*>(r.data().data())};
}

GrayRaster from_mat(const cv::Mat& m) {
  cv::Mat c = m.isContinuous() ? m : m.clone();
  return {c.cols, c.rows, std::vector<std::uint8_t>(c.datastart, c.dataend)};
}

GrayRaster area_resize(const GrayRaster& r, int w, int h) {
  if (r.width() == w && r.height() == h) return r;
  cv::Mat dst;
  const bool shrink = w < r.width() && h < r.height();
  cv::resize(view(r), dst, cv::Size(w, h), 0, 0, shrink ? cv::INTER_AREA : cv::INTER_LINEAR);
  return from_mat(dst);
}

bool has_ink(const GrayRaster& r) {
  return std::any_of(r.data().begin(), r.data().end(), [](std::uint8_t v) { return v < 128; });
}

bool is_constant(const GrayRaster& r) {
  const auto& d = r.data();
  return d.empty() || std::all_of(d.begin(), d.end(), [&](std::uint8_t v) { return v == d.front(); });
}

// Correlation map of `tmpl` slid over `img` (TM_CCOEFF_NORMED). Constant
// windows score 0.
cv::Mat correlate(const cv::Mat& img, const cv::Mat& tmpl) {
  cv::Mat out;
  cv::matchTemplate(img, tmpl, out, cv::TM_CCOEFF_NORMED);
  cv::patchNaNs(out, 0.0);
  return out;
}

}  // namespace

double ncc(const GrayRaster& a, const GrayRaster& b, const Rect& region) {
  if (a.width() != b.width() || a.height() != b.height()) throw Error("ncc: size mismatch");
  const Rect r = intersect(region, {0, 0, a.width(), a.height()});
  if (r.empty()) return 0.0;
  double sa = 0, sb = 0;
  const double n = static_cast<double>(r.area());
  for (int y = r.y; y < r.bottom(); ++y)
    for (int x = r.x; x < r.right(); ++x) {
      sa += a.at(x, y);
      sb += b.at(x, y);
    }
  const double ma = sa / n, mb = sb / n;
  double sab = 0, saa = 0, sbb = 0;
  for (int y = r.y; y < r.bottom(); ++y)
    for (int x = r.x; x < r.right(); ++x) {
      const double da = a.at(x, y) - ma, db = b.at(x, y) - mb;
      sab += da * db;
      saa += da * da;
      sbb += db * db;
    }
  if (saa <= 0 || sbb <= 0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double ncc(const GrayRaster& a, const GrayRaster& b) { return ncc(a, b, {0, 0, a.width(), a.height()}); }

GrayRaster normalize_symbol_crop(const GrayRaster& crop, int size) {
  if (size < 1) throw Error("normalize_symbol_crop: size must be >= 1");
  if (crop.empty()) return GrayRaster(size, size, 255);
  const int side = std::max(crop.width(), crop.height());
  GrayRaster square(side, side, 255);
  const int ox = (side - crop.width()) / 2, oy = (side - crop.height()) / 2;
  for (int y = 0; y < crop.height(); ++y) std::copy(crop.row(y).begin(), crop.row(y).end(), square.row(y + oy).begin() + ox);
  return area_resize(square, size, size);
}

std::vector<ScoredBox> nms(std::vector<ScoredBox> boxes, double iou_min) {
  std::sort(boxes.begin(), boxes.end(), [](const ScoredBox& a, const ScoredBox& b) {
    return std::tuple(-a.score, a.bbox.y, a.bbox.x, a.bbox.h, a.bbox.w) <
           std::tuple(-b.score, b.bbox.y, b.bbox.x, b.bbox.h, b.bbox.w);
  });
  std::vector<ScoredBox> kept;
  for (const auto& b : boxes) {
    const bool dup =
        std::any_of(kept.begin(), kept.end(), [&](const ScoredBox& k) { return iou(k.bbox, b.bbox) >= iou_min; });
    if (!dup) kept.push_back(b);
  }
  return kept;
}

// ---------------------------------------------------------------------------
// Template bank

TemplateBank TemplateBank::build(int size) {
  TemplateBank bank;
  bank.size = size;
  for (int c = 1; c <= kComplexClassCount; ++c) bank.entries.push_back({c, class_name(c), render_symbol(c, size, 0)});
  return bank;
}

void TemplateBank::save(const std::filesystem::path& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create template directory " + dir.string() + ": " + ec.message());
  nlohmann::json manifest;
  manifest["canonical_size"] = size;
  manifest["templates"] = nlohmann::json::array();
  for (const auto& e : entries) {
    const std::string file = "class_" + std::to_string(e.class_id) + ".png";
    save_png(e.mask, dir / file);
    manifest["templates"].push_back({{"class_id", e.class_id}, {"name", e.name}, {"file", file}});
  }
  const std::string text = manifest.dump(2) + "\n";
  write_file_bytes(dir / "manifest.json", std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

TemplateBank TemplateBank::load(const std::filesystem::path& dir) {
  const auto bytes = read_file_bytes(dir / "manifest.json");
  TemplateBank bank;
  try {
    const auto manifest = nlohmann::json::parse(bytes.begin(), bytes.end());
    bank.size = manifest.at("canonical_size").get<int>();
    if (bank.size < 8) throw ConfigError("template manifest: canonical_size must be >= 8");
    for (const auto& t : manifest.at("templates")) {
      TemplateEntry e;
      e.class_id = t.at("class_id").get<int>();
      if (!is_valid_class(e.class_id)) throw ConfigError("template manifest: invalid class " + std::to_string(e.class_id));
      e.name = t.value("name", class_name(e.class_id));
      e.mask = load_gray_file(dir / t.at("file").get<std::string>());
      if (e.mask.width() != bank.size || e.mask.height() != bank.size) {
        e.mask = area_resize(e.mask, bank.size, bank.size);
      }
      bank.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("template manifest: " + std::string(e.what()));
  }
  if (bank.entries.empty()) throw ConfigError("template manifest lists no templates");
  return bank;
}

// ---------------------------------------------------------------------------
// Localizer

TemplateLocalizer::TemplateLocalizer(const TemplateBank& bank, double floor) : floor_(floor) {
  if (bank.entries.empty()) throw ConfigError("template bank is empty");
  const double scales[] = {0.75, 1.0, 1.25};
  std::vector<std::tuple<int, int>> keys;
  for (double s : scales) {
    const int size = std::max(8, static_cast<int>(std::lround(bank.size * s)));
    for (int rot = 0; rot < 4; ++rot) {
      for (const auto& e : bank.entries) {
        GrayRaster m = area_resize(rotate_cw(e.mask, rot), size, size);
        const Rect ink = ink_bounds(m);
        if (ink.empty()) continue;
        variants_.push_back({e.class_id, rot * 90, std::move(m), ink});
      }
      keys.emplace_back(size, rot * 90);
    }
  }
  for (const auto& [size, rot] : keys) {
    Level lv{size, rot, GrayRaster(size, size, 255), {}, {}};
    for (std::size_t i = 0; i < variants_.size(); ++i) {
      const auto& v = variants_[i];
      if (v.mask.width() != size || v.rotation != rot) continue;
      lv.members.push_back(i);
      auto& u = lv.union_mask.data();
      const auto& m = v.mask.data();
      for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::min(u[i], m[i]);
    }
    lv.union_half = area_resize(lv.union_mask, std::max(4, size / 2), std::max(4, size / 2));
    if (!lv.members.empty()) levels_.push_back(std::move(lv));
  }
  min_size_ = levels_.front().size;
  for (const auto& lv : levels_) min_size_ = std::min(min_size_, lv.size);
}

// True when, after removing straight runs at least as long as the smallest
// template, some ink component still spans half of that template.
static bool has_symbol_sized_blob(const GrayRaster& patch, int min_template) {
  const BinaryRaster a = binarize(patch);
  const BinaryRaster lines = logical_or(open(a, {Orientation::horizontal, min_template}),
                                        open(a, {Orientation::vertical, min_template}));
  for (const auto& c : connected_components(subtract(a, lines))) {
    if (std::max(c.bbox.w, c.bbox.h) >= min_template / 2) return true;
  }
  return false;
}

std::vector<ScoredBox> TemplateLocalizer::propose(const GrayRaster& patch) const {
  if (patch.empty() || !has_ink(patch)) return {};
  if (!has_symbol_sized_blob(patch, min_size_)) return {};
  const cv::Mat img = view(patch);
  // Coarse pass on a half-resolution copy; peaks are re-scored at full resolution.
  const GrayRaster half_patch = area_resize(patch, std::max(1, patch.width() / 2), std::max(1, patch.height() / 2));
  const cv::Mat half = view(half_patch);
  const double coarse_floor = floor_ - 0.15;
  std::vector<ScoredBox> out;
  for (const auto& lv : levels_) {
    if (lv.size > patch.width() || lv.size > patch.height()) continue;
    if (lv.union_half.width() > half.cols || lv.union_half.height() > half.rows) continue;
    const cv::Mat resp = correlate(half, view(lv.union_half));
    const int rad = std::max(1, lv.size / 8);
    for (int y = 0; y < resp.rows; ++y) {
      const float* row = resp.ptr<float>(y);
      for (int x = 0; x < resp.cols; ++x) {
        const float v = row[x];
        if (v <= coarse_floor) continue;
        bool is_max = true;
        for (int yy = std::max(0, y - rad); yy <= std::min(resp.rows - 1, y + rad) && is_max; ++yy) {
          const float* r2 = resp.ptr<float>(yy);
          for (int xx = std::max(0, x - rad); xx <= std::min(resp.cols - 1, x + rad); ++xx) {
            if (r2[xx] > v || (r2[xx] == v && std::tie(yy, xx) < std::tie(y, x))) {
              is_max = false;
              break;
            }
          }
        }
        if (!is_max) continue;
        // Full-resolution union peak near the coarse one.
        const int fx0 = std::max(0, 2 * x - 3), fy0 = std::max(0, 2 * y - 3);
        const int fx1 = std::min(patch.width(), 2 * x + lv.size + 4);
        const int fy1 = std::min(patch.height(), 2 * y + lv.size + 4);
        if (fx1 - fx0 < lv.size || fy1 - fy0 < lv.size) continue;
        const cv::Mat fine = correlate(img(cv::Rect(fx0, fy0, fx1 - fx0, fy1 - fy0)), view(lv.union_mask));
        double peak = 0;
        cv::Point at;
        cv::minMaxLoc(fine, nullptr, &peak, nullptr, &at);
        if (peak <= floor_) continue;
        const int px = fx0 + at.x, py = fy0 + at.y;
        // Best single class within one pixel of the union peak.
        const int x0 = std::max(0, px - 1), y0 = std::max(0, py - 1);
        const int x1 = std::min(patch.width(), px + lv.size + 1), y1 = std::min(patch.height(), py + lv.size + 1);
        const cv::Mat roi = img(cv::Rect(x0, y0, x1 - x0, y1 - y0));
        double best = 0.0;
        Rect box;
        for (std::size_t mi : lv.members) {
          const Variant* m = &variants_[mi];
          const cv::Mat r = correlate(roi, view(m->mask));
          double mx = 0;
          cv::Point mat;
          cv::minMaxLoc(r, nullptr, &mx, nullptr, &mat);
          if (mx > best) {
            best = mx;
            box = {x0 + mat.x + m->ink.x, y0 + mat.y + m->ink.y, m->ink.w, m->ink.h};
          }
        }
        if (best > floor_) out.push_back({box, std::min(1.0, best)});
      }
    }
  }
  return nms(std::move(out), 0.5);
}

// ---------------------------------------------------------------------------
// Classifier

TemplateClassifier::TemplateClassifier(const TemplateBank& bank) : size_(bank.size) {
  if (bank.entries.empty()) throw ConfigError("template bank is empty");
  for (const auto& e : bank.entries) {
    for (int rot = 0; rot < 4; ++rot) {
      const GrayRaster m = rotate_cw(e.mask, rot);
      const Rect ink = ink_bounds(m);
      if (ink.empty()) continue;
      templates_.push_back({e.class_id, normalize_symbol_crop(crop(m, ink), size_)});
    }
  }
}

ClassScore TemplateClassifier::classify(const GrayRaster& input) const {
  if (is_constant(input)) return {kOthers, 0.0};
  const GrayRaster n = normalize_symbol_crop(input, size_);
  // One pixel of white margin lets each template slide by +-1.
  GrayRaster padded(size_ + 2, size_ + 2, 255);
  for (int y = 0; y < size_; ++y) std::copy(n.row(y).begin(), n.row(y).end(), padded.row(y + 1).begin() + 1);
  const cv::Mat img = view(padded);

  struct Scored {
    int class_id;
    double full;
    std::size_t tmpl;
    cv::Point shift;
  };
  std::vector<Scored> per_class;
  for (std::size_t i = 0; i < templates_.size(); ++i) {
    const auto& t = templates_[i];
    const cv::Mat r = correlate(img, view(t.image));
    double mx = 0;
    cv::Point at;
    cv::minMaxLoc(r, nullptr, &mx, nullptr, &at);
    auto it = std::find_if(per_class.begin(), per_class.end(), [&](const Scored& s) { return s.class_id == t.class_id; });
    if (it == per_class.end()) {
      per_class.push_back({t.class_id, mx, i, at});
    } else if (mx > it->full) {
      *it = {t.class_id, mx, i, at};
    }
  }
  if (per_class.empty()) return {kOthers, 0.0};
  const double top = std::max_element(per_class.begin(), per_class.end(), [](const Scored& a, const Scored& b) {
                       return a.full < b.full;
                     })->full;
  // Near-ties: the central region is where the complex classes differ.
  const Rect centre{size_ / 4, size_ / 4, size_ / 2, size_ / 2};
  const Scored* winner = nullptr;
  double winner_centre = -2.0;
  for (const auto& s : per_class) {
    if (s.full < top - 0.02) continue;
    const GrayRaster shifted = crop(padded, {s.shift.x, s.shift.y, size_, size_});
    const double c = ncc(shifted, templates_[s.tmpl].image, centre);
    const bool better = !winner || c > winner_centre + 1e-12 ||
                        (std::abs(c - winner_centre) <= 1e-12 &&
                         std::tie(s.full, winner->class_id) > std::tie(winner->full, s.class_id));
    if (better) {
      winner = &s;
      winner_centre = c;
    }
  }
  return {winner->class_id, std::clamp(winner->full, 0.0, 1.0)};
}

// ---------------------------------------------------------------------------
// Pipeline

void SymbolDetectConfig::validate() const {
  if (patch_size < 8) throw ConfigError("symbols.patch_size must be >= 8");
  if (!(patch_overlap >= 0.0 && patch_overlap < 1.0)) throw ConfigError("symbols.patch_overlap must lie in [0, 1)");
  if (!(localizer_min > 0.0 && localizer_min < 1.0)) throw ConfigError("symbols.localizer_min must lie in (0, 1)");
  if (!(classifier_min > 0.0 && classifier_min < 1.0)) throw ConfigError("symbols.classifier_min must lie in (0, 1)");
  if (!(nms_iou > 0.0 && nms_iou <= 1.0)) throw ConfigError("symbols.nms_iou must lie in (0, 1]");
}

SymbolDetection detect_complex_symbols(const GrayRaster& sheet, const SymbolLocalizer& loc,
                                       const FineGrainedClassifier& cls, const SymbolDetectConfig& cfg) {
  cfg.validate();
  SymbolDetection out;
  if (sheet.empty()) return out;
  const auto layout = patch_layout(sheet.width(), sheet.height(), cfg.patch_size, cfg.patch_overlap);
  std::vector<std::vector<ScoredBox>> per_patch(layout.size());
  std::vector<std::string> warnings(layout.size());
  parallel_for(layout.size(), loc.thread_safe() ? cfg.threads : 1, [&](std::size_t i) {
    const Rect& region = layout[i].region;
    try {
      for (const auto& p : loc.propose(crop(sheet, region))) {
        if (p.score < cfg.localizer_min) continue;
        const Rect b = intersect({p.bbox.x + region.x, p.bbox.y + region.y, p.bbox.w, p.bbox.h}, region);
        if (!b.empty()) per_patch[i].push_back({b, std::clamp(p.score, 0.0, 1.0)});
      }
    } catch (const std::exception& e) {
      warnings[i] = "symbol localizer failed on patch at (" + std::to_string(region.x) + "," +
                    std::to_string(region.y) + "): " + e.what();
    }
  });
  std::vector<ScoredBox> all;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (!warnings[i].empty()) out.warnings.push_back(warnings[i]);
    all.insert(all.end(), per_patch[i].begin(), per_patch[i].end());
  }
  const auto kept = nms(std::move(all), cfg.nms_iou);

  std::vector<SymbolInstance> symbols(kept.size());
  std::vector<std::string> cls_warnings(kept.size());
  std::vector<char> ok(kept.size(), 1);
  parallel_for(kept.size(), cls.thread_safe() ? cfg.threads : 1, [&](std::size_t i) {
    SymbolInstance& s = symbols[i];
    s.bbox = kept[i].bbox;
    try {
      const ClassScore c = cls.classify(crop(sheet, s.bbox));
      const double score = std::clamp(c.score, 0.0, 1.0);
      s.class_id = (score >= cfg.classifier_min && is_valid_class(c.class_id)) ? c.class_id : kOthers;
      s.score = s.class_id == kOthers ? kept[i].score : score;
    } catch (const std::exception& e) {
      ok[i] = 0;
      cls_warnings[i] = std::string("symbol classifier failed: ") + e.what();
    }
  });
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (ok[i]) out.symbols.push_back(std::move(symbols[i]));
    else out.warnings.push_back(cls_warnings[i]);
  }
  std::sort(out.symbols.begin(), out.symbols.end(), [](const SymbolInstance& a, const SymbolInstance& b) {
    return std::tuple(a.bbox.y, a.bbox.x, a.bbox.h, a.bbox.w) < std::tuple(b.bbox.y, b.bbox.x, b.bbox.h, b.bbox.w);
  });
  return out;
}

}  // namespace pidparse
