#include "pidparse/text.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <tuple>

#include "pidparse/components.hpp"
#include "pidparse/error.hpp"
#include "pidparse/morphology.hpp"
#include "pidparse/parallel.hpp"

namespace pidparse {

namespace {

bool box_less(const Rect& a, const Rect& b) {
  return std::tuple(a.y, a.x, a.h, a.w) < std::tuple(b.y, b.x, b.h, b.w);
}

std::vector<int> axis_offsets(int extent, int size, int stride) {
  std::vector<int> out;
  if (extent <= size) return {0};
  for (int o = 0;; o += stride) {
    if (o + size >= extent) {
      out.push_back(extent - size);
      break;
    }
    out.push_back(o);
  }
  return out;
}

}  // namespace

std::vector<Patch> patch_layout(int width, int height, int size, double overlap) {
  if (size < 1) throw ConfigError("patch size must be >= 1");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("patch overlap must lie in [0, 1)");
  const int stride = std::max(1, static_cast<int>(std::lround(size * (1.0 - overlap))));
  std::vector<Patch> out;
  for (int y : axis_offsets(height, size, stride)) {
    for (int x : axis_offsets(width, size, stride)) {
      out.push_back({{x, y, std::min(size, width), std::min(size, height)}});
    }
  }
  return out;
}

std::vector<PatchView> split_patches(const GrayRaster& sheet, int size, double overlap) {
  std::vector<PatchView> out;
  for (const auto& p : patch_layout(sheet.width(), sheet.height(), size, overlap)) {
    out.push_back({crop(sheet, p.region), {p.region.x, p.region.y}});
  }
  return out;
}

std::vector<TextBox> merge_boxes_iou(std::vector<TextBox> boxes, double iou_min) {
  bool changed = true;
  while (changed) {
    changed = false;
    const std::size_t n = boxes.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
      while (parent[i] != i) i = parent[i] = parent[parent[i]];
      return i;
    };
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (iou(boxes[i].bbox, boxes[j].bbox) >= iou_min) {
          const auto a = find(i), b = find(j);
          if (a != b) {
            parent[std::max(a, b)] = std::min(a, b);
            changed = true;
          }
        }
      }
    }
    if (!changed) break;
    std::vector<TextBox> merged;
    std::vector<long> slot(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = find(i);
      if (slot[r] < 0) {
        slot[r] = static_cast<long>(merged.size());
        merged.push_back(boxes[i]);
        continue;
      }
      TextBox& m = merged[slot[r]];
      m.bbox = unite(m.bbox, boxes[i].bbox);
      if (boxes[i].confidence > m.confidence) {
        m.confidence = boxes[i].confidence;
        m.text = boxes[i].text;
      }
    }
    boxes = std::move(merged);
  }
  std::sort(boxes.begin(), boxes.end(), [](const TextBox& a, const TextBox& b) {
    return std::tuple(a.bbox.y, a.bbox.x, a.bbox.h, a.bbox.w, a.confidence) <
           std::tuple(b.bbox.y, b.bbox.x, b.bbox.h, b.bbox.w, b.confidence);
  });
  return boxes;
}

std::vector<ScoredBox> InkTextDetector::detect(const GrayRaster& patch) const {
  const int g = GlyphAtlas::kCellHeight * scale_;
  const BinaryRaster ink = binarize(patch, BinarizePolicy::fixed(128));
  const int line_len = static_cast<int>(std::lround(1.5 * g));
  BinaryRaster lines = logical_or(open(ink, {Orientation::horizontal, line_len}),
                                  open(ink, {Orientation::vertical, line_len}));
  const BinaryRaster rest = subtract(ink, lines);

  struct Cand {
    Rect box;
    bool tall;
  };
  std::vector<Cand> cands;
  const double max_side = 1.3 * g;
  const std::size_t min_pixels = static_cast<std::size_t>(2 * scale_ * scale_);
  for (const auto& c : connected_components(rest)) {
    if (c.bbox.h > max_side || c.bbox.w > max_side) continue;
    if (c.pixel_count < min_pixels) continue;
    cands.push_back({c.bbox, c.bbox.h >= 0.5 * g});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return box_less(a.box, b.box); });

  const std::size_t n = cands.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  const double max_gap = 1.5 * g;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Rect& a = cands[i].box;
      const Rect& b = cands[j].box;
      const int overlap = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
      if (overlap < 0.5 * std::min(a.h, b.h)) continue;
      const int gap = std::max(a.x, b.x) - std::min(a.right(), b.right());
      if (gap > max_gap) continue;
      const auto ra = find(i), rb = find(j);
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
  }
  std::vector<Rect> group_box(n);
  std::vector<int> tall(n, 0);
  std::vector<bool> used(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = find(i);
    group_box[r] = used[r] ? unite(group_box[r], cands[i].box) : cands[i].box;
    used[r] = true;
    tall[r] += cands[i].tall;
  }
  std::vector<ScoredBox> out;
  for (std::size_t r = 0; r < n; ++r) {
    if (!used[r] || find(r) != r) continue;
    const Rect& b = group_box[r];
    if (tall[r] < 2) continue;
    if (b.h > 1.5 * g || b.w < 1.2 * b.h) continue;
    out.push_back({b, 1.0});
  }
  std::sort(out.begin(), out.end(), [](const ScoredBox& a, const ScoredBox& b) { return box_less(a.bbox, b.bbox); });
  return out;
}

void TextConfig::validate() const {
  if (patch_size < 1) throw ConfigError("text.patch_size must be >= 1");
  if (!(patch_overlap >= 0.0 && patch_overlap < 1.0)) throw ConfigError("text.patch_overlap must lie in [0, 1)");
  if (!(merge_iou > 0.0 && merge_iou <= 1.0)) throw ConfigError("text.merge_iou must lie in (0, 1]");
}

Rect rotate_box(const Rect& box, int sheet_height) {
  return {sheet_height - box.y - box.h, box.x, box.h, box.w};
}

Rect unrotate_box(const Rect& rotated, int sheet_height) {
  return {rotated.y, sheet_height - rotated.x - rotated.w, rotated.h, rotated.w};
}

namespace {

// Detect on every patch, shift to sheet coordinates, drop boxes cut by an
// interior patch border (an overlapping neighbour sees them whole), then merge.
std::vector<TextBox> detect_pass(const GrayRaster& sheet, const TextDetector& det, const TextConfig& cfg,
                                 std::vector<std::string>& warnings) {
  const auto layout = patch_layout(sheet.width(), sheet.height(), cfg.patch_size, cfg.patch_overlap);
  std::vector<std::vector<TextBox>> per_patch(layout.size());
  std::vector<std::string> patch_warnings(layout.size());
  std::mutex serial;
  const int threads = det.thread_safe() ? cfg.threads : 1;
  parallel_for(layout.size(), threads, [&](std::size_t i) {
    const Rect& region = layout[i].region;
    std::vector<ScoredBox> found;
    try {
      found = det.detect(crop(sheet, region));
    } catch (const std::exception& e) {
      patch_warnings[i] = "text detector failed on patch at (" + std::to_string(region.x) + "," +
                          std::to_string(region.y) + "): " + e.what();
      return;
    }
    for (const auto& f : found) {
      const Rect& b = f.bbox;
      if (b.empty()) continue;
      const bool cut = (b.x <= 0 && region.x > 0) || (b.y <= 0 && region.y > 0) ||
                       (b.right() >= region.w && region.right() < sheet.width()) ||
                       (b.bottom() >= region.h && region.bottom() < sheet.height());
      if (cut) continue;
      const Rect clipped = intersect({b.x + region.x, b.y + region.y, b.w, b.h}, region);
      if (clipped.empty()) continue;
      per_patch[i].push_back({clipped, "", Orientation::horizontal, std::clamp(f.score, 0.0, 1.0)});
    }
  });
  std::vector<TextBox> all;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (!patch_warnings[i].empty()) warnings.push_back(patch_warnings[i]);
    all.insert(all.end(), per_patch[i].begin(), per_patch[i].end());
  }
  return merge_boxes_iou(std::move(all), cfg.merge_iou);
}

}  // namespace

TextExtraction extract_text(const GrayRaster& sheet, const TextDetector& det, const TextRecognizer& rec,
                            const TextConfig& cfg) {
  cfg.validate();
  TextExtraction out;
  auto horizontal = detect_pass(sheet, det, cfg, out.warnings);

  std::vector<TextBox> vertical;
  if (cfg.vertical_pass) {
    const GrayRaster rotated = rotate_cw(sheet);
    for (auto& b : detect_pass(rotated, det, cfg, out.warnings)) {
      b.bbox = unrotate_box(b.bbox, sheet.height());
      b.orientation = Orientation::vertical;
      const bool duplicate = std::any_of(horizontal.begin(), horizontal.end(), [&](const TextBox& h) {
        return iou(h.bbox, b.bbox) >= cfg.vertical_duplicate_iou;
      });
      if (!duplicate) vertical.push_back(std::move(b));
    }
  }
  out.boxes = std::move(horizontal);
  out.boxes.insert(out.boxes.end(), vertical.begin(), vertical.end());

  std::vector<std::string> rec_warnings(out.boxes.size());
  const int threads = rec.thread_safe() ? cfg.threads : 1;
  parallel_for(out.boxes.size(), threads, [&](std::size_t i) {
    TextBox& b = out.boxes[i];
    GrayRaster c = crop(sheet, b.bbox);
    if (b.orientation == Orientation::vertical) c = rotate_cw(c);
    try {
      const auto r = rec.recognize(c);
      b.text = r.text;
      b.confidence = std::clamp(r.confidence, 0.0, 1.0);
    } catch (const std::exception& e) {
      rec_warnings[i] = std::string("text recognizer failed: ") + e.what();
    }
  });
  for (auto& w : rec_warnings)
    if (!w.empty()) out.warnings.push_back(std::move(w));
  std::sort(out.boxes.begin(), out.boxes.end(), [](const TextBox& a, const TextBox& b) {
    return std::tuple(a.bbox.y, a.bbox.x, a.bbox.h, a.bbox.w, static_cast<int>(a.orientation)) <
           std::tuple(b.bbox.y, b.bbox.x, b.bbox.h, b.bbox.w, static_cast<int>(b.orientation));
  });
  return out;
}

}  // namespace pidparse
