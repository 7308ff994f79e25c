#include "pidparse/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <regex>

#include "pidparse/error.hpp"
#include "pidparse/image_io.hpp"
#include "pidparse/parallel.hpp"
#include "pidparse/symbol_catalog.hpp"

namespace pidparse {

using nlohmann::json;

namespace {

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

/// Whitens a band of +-half pixels around each line at least min_len long, so
/// dashes and pipes beside a label are not read as glyphs.
GrayRaster erase_lines(GrayRaster sheet, const std::vector<LineSegment>& lines, double min_len, int half) {
  for (const auto& l : lines) {
    if (l.length() < min_len) continue;
    const bool h = l.orientation == Orientation::horizontal;
    const int c = static_cast<int>(std::lround(l.perp()));
    const int x0 = std::max(0, h ? l.p1.x : c - half);
    const int x1 = std::min(sheet.width() - 1, h ? l.p2.x : c + half);
    const int y0 = std::max(0, h ? c - half : l.p1.y);
    const int y1 = std::min(sheet.height() - 1, h ? c + half : l.p2.y);
    if (x1 < x0 || y1 < y0) continue;
    for (int y = y0; y <= y1; ++y) {
      auto row = sheet.row(y);
      std::fill(row.begin() + x0, row.begin() + x1 + 1, std::uint8_t{255});
    }
  }
  return sheet;
}

}  // namespace

void PipelineConfig::validate() const {
  if (resize_width < 0) throw ConfigError("resize_width must be >= 0");
  if (k_text_neighbors < 1) throw ConfigError("k_text_neighbors must be >= 1");
  lines.validate();
  text.validate();
  shapes.validate();
  symbols.validate();
  graph.validate();
  generator.validate();
}

PipelineConfig PipelineConfig::from_json(const std::string& text, const std::filesystem::path& base_dir) {
  PipelineConfig c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("pipeline config must be a JSON object");
    take(j, "resize_width", c.resize_width);
    take(j, "k_text_neighbors", c.k_text_neighbors);
    take(j, "threads", c.threads);
    if (j.contains("rules_file")) c.rules_file = resolve(base_dir, j.at("rules_file").get<std::string>());
    if (j.contains("composition_file")) {
      c.composition_file = resolve(base_dir, j.at("composition_file").get<std::string>());
    }
    if (j.contains("template_dir")) c.template_dir = resolve(base_dir, j.at("template_dir").get<std::string>());
    if (j.contains("lines")) {
      const auto& l = j.at("lines");
      take(l, "kernel_fraction", c.lines.kernel_fraction);
      take(l, "min_kernel", c.lines.min_kernel);
      take(l, "dash_jump_limit", c.lines.dash_jump_limit);
      take(l, "dash_merge_eps", c.lines.dash_merge_eps);
      take(l, "dash_merge_min_pts", c.lines.dash_merge_min_pts);
      take(l, "min_dashes", c.lines.min_dashes);
      take(l, "min_dashed_kernels", c.lines.min_dashed_kernels);
    }
    if (j.contains("text")) {
      const auto& t = j.at("text");
      take(t, "patch_size", c.text.patch_size);
      take(t, "patch_overlap", c.text.patch_overlap);
      take(t, "merge_iou", c.text.merge_iou);
      take(t, "vertical_pass", c.text.vertical_pass);
      take(t, "vertical_duplicate_iou", c.text.vertical_duplicate_iou);
    }
    if (j.contains("shapes")) {
      const auto& s = j.at("shapes");
      take(s, "radius_min_fraction", c.shapes.radius_min_fraction);
      take(s, "radius_max_fraction", c.shapes.radius_max_fraction);
      take(s, "hough_vote_min", c.shapes.hough_vote_min);
      take(s, "rect_edge_support_min", c.shapes.rect_edge_support_min);
      take(s, "rect_min_side_fraction", c.shapes.rect_min_side_fraction);
      take(s, "rect_max_side_fraction", c.shapes.rect_max_side_fraction);
      take(s, "corner_tolerance", c.shapes.corner_tolerance);
    }
    if (j.contains("symbols")) {
      const auto& s = j.at("symbols");
      take(s, "patch_size", c.symbols.patch_size);
      take(s, "patch_overlap", c.symbols.patch_overlap);
      take(s, "localizer_min", c.symbols.localizer_min);
      take(s, "classifier_min", c.symbols.classifier_min);
      take(s, "nms_iou", c.symbols.nms_iou);
    }
    if (j.contains("graph")) {
      const auto& g = j.at("graph");
      take(g, "alpha", c.graph.alpha);
      take(g, "eta", c.graph.eta);
      take(g, "cluster_eps", c.graph.cluster_eps);
      take(g, "cluster_min_pts", c.graph.cluster_min_pts);
      take(g, "label_regexes", c.graph.label_regexes);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("pipeline config: ") + e.what());
  }
  if (const auto j = json::parse(text, nullptr, false); j.is_object() && j.contains("generator")) {
    c.generator = gen_config_from_json(j.at("generator").dump());
  }
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return from_json(std::string(bytes.begin(), bytes.end()), path.parent_path());
}

std::string PipelineConfig::to_json() const {
  json j;
  j["resize_width"] = resize_width;
  j["k_text_neighbors"] = k_text_neighbors;
  j["threads"] = threads;
  if (!rules_file.empty()) j["rules_file"] = rules_file.string();
  if (!composition_file.empty()) j["composition_file"] = composition_file.string();
  if (!template_dir.empty()) j["template_dir"] = template_dir.string();
  j["lines"] = {{"kernel_fraction", lines.kernel_fraction},
                {"min_kernel", lines.min_kernel},
                {"dash_jump_limit", lines.dash_jump_limit},
                {"dash_merge_eps", lines.dash_merge_eps},
                {"dash_merge_min_pts", lines.dash_merge_min_pts},
                {"min_dashes", lines.min_dashes},
                {"min_dashed_kernels", lines.min_dashed_kernels}};
  j["text"] = {{"patch_size", text.patch_size},
               {"patch_overlap", text.patch_overlap},
               {"merge_iou", text.merge_iou},
               {"vertical_pass", text.vertical_pass},
               {"vertical_duplicate_iou", text.vertical_duplicate_iou}};
  j["shapes"] = {{"radius_min_fraction", shapes.radius_min_fraction},
                 {"radius_max_fraction", shapes.radius_max_fraction},
                 {"hough_vote_min", shapes.hough_vote_min},
                 {"rect_edge_support_min", shapes.rect_edge_support_min},
                 {"rect_min_side_fraction", shapes.rect_min_side_fraction},
                 {"rect_max_side_fraction", shapes.rect_max_side_fraction},
                 {"corner_tolerance", shapes.corner_tolerance}};
  j["symbols"] = {{"patch_size", symbols.patch_size},
                  {"patch_overlap", symbols.patch_overlap},
                  {"localizer_min", symbols.localizer_min},
                  {"classifier_min", symbols.classifier_min},
                  {"nms_iou", symbols.nms_iou}};
  j["graph"] = {{"alpha", graph.alpha},
                {"eta", graph.eta},
                {"cluster_eps", graph.cluster_eps},
                {"cluster_min_pts", graph.cluster_min_pts},
                {"label_regexes", graph.label_regexes}};
  j["generator"] = json::parse(gen_config_to_json(generator));
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

struct Digitizer::Models {
  TemplateBank bank;
  TemplateLocalizer localizer;
  TemplateClassifier classifier;
  InkTextDetector detector;
  GlyphRecognizer recognizer;

  Models(TemplateBank b, int glyph_scale)
      : bank(std::move(b)), localizer(bank), classifier(bank), detector(glyph_scale), recognizer() {}
};

namespace {

std::unique_ptr<Digitizer::Models> make_models(const PipelineConfig& cfg, int width);

}  // namespace

Digitizer::Digitizer(PipelineConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (!cfg_.rules_file.empty()) rules_ = RuleSet::load(cfg_.rules_file);
  composition_ = cfg_.composition_file.empty() ? RuleTable::defaults() : RuleTable::load(cfg_.composition_file);
  if (cfg_.resize_width > 0) models_ = make_models(cfg_, cfg_.resize_width);
}

Digitizer::~Digitizer() = default;

namespace {

std::unique_ptr<Digitizer::Models> make_models(const PipelineConfig& cfg, int width) {
  TemplateBank bank = cfg.template_dir.empty() ? TemplateBank::build(complex_symbol_size(width))
                                               : TemplateBank::load(cfg.template_dir);
  return std::make_unique<Digitizer::Models>(std::move(bank), glyph_scale_for_width(width));
}

struct Scaler {
  double sx = 1.0, sy = 1.0;

  int x(double v) const { return static_cast<int>(std::lround(v * sx)); }
  int y(double v) const { return static_cast<int>(std::lround(v * sy)); }
  Point operator()(Point p) const { return {x(p.x), y(p.y)}; }
  Rect operator()(const Rect& r) const {
    const int x0 = x(r.x), y0 = y(r.y);
    return {x0, y0, x(r.right()) - x0, y(r.bottom()) - y0};
  }
  LineSegment operator()(LineSegment s) const {
    s.p1 = (*this)(s.p1);
    s.p2 = (*this)(s.p2);
    return s;
  }
};

}  // namespace

DigitizeOutput Digitizer::run(const GrayRaster& input) const {
  DigitizeOutput out;
  if (input.empty()) throw DecodeError("empty sheet");
  const GrayRaster sheet =
      cfg_.resize_width > 0 && input.width() != cfg_.resize_width ? resize_to_width(input, cfg_.resize_width) : input;
  std::unique_ptr<Models> local;
  const Models* m = models_.get();
  if (!m) {
    local = make_models(cfg_, sheet.width());
    m = local.get();
  }
  const int threads = resolve_threads(cfg_.threads);
  const BinaryRaster ink = binarize(sheet);
  const int k = cfg_.lines.kernel_length(sheet.width(), sheet.height());

  // Lines: solid components, then dash chains rebuilt from the short ones.
  const auto solid = detect_solid_lines_detailed(ink, cfg_.lines);
  const std::vector<LineSegment> lines = detect_lines(solid, ink, cfg_.lines);

  // Text.
  TextConfig tcfg = cfg_.text;
  tcfg.threads = threads;
  const GrayRaster text_sheet = erase_lines(sheet, lines, 9.0 * k, std::max(2, k / 2));
  auto text = extract_text(text_sheet, m->detector, m->recognizer, tcfg);
  out.warnings.insert(out.warnings.end(), text.warnings.begin(), text.warnings.end());

  // Complex symbols. They carry no text, so glyph-like strokes inside them are dropped.
  SymbolDetectConfig scfg = cfg_.symbols;
  scfg.threads = threads;
  // Labels sit close enough to fall inside a template window; blank them first.
  GrayRaster symbol_sheet = sheet;
  for (const auto& t : text.boxes) {
    const Rect r = intersect(t.bbox, Rect{0, 0, sheet.width(), sheet.height()});
    for (int y = r.y; y < r.bottom(); ++y) {
      auto row = symbol_sheet.row(y);
      std::fill(row.begin() + r.x, row.begin() + r.right(), std::uint8_t{255});
    }
  }
  auto complex = detect_complex_symbols(symbol_sheet, m->localizer, m->classifier, scfg);
  out.warnings.insert(out.warnings.end(), complex.warnings.begin(), complex.warnings.end());
  std::vector<TextBox> texts;
  for (auto& t : text.boxes) {
    const bool inside = std::any_of(complex.symbols.begin(), complex.symbols.end(), [&](const SymbolInstance& s) {
      return intersect(t.bbox, s.bbox).area() * 2 > t.bbox.area();
    });
    if (!inside) texts.push_back(std::move(t));
  }

  // Basic shapes and their compositions; complex proposals inside one are dropped.
  const auto circles = detect_circles(ink, cfg_.shapes);
  const auto rects = verify_rectangles(sample_rect_vertices(solid.horizontal, solid.vertical), ink, cfg_.shapes);
  std::vector<SymbolInstance> symbols = assemble_basic_symbols(circles, rects, lines, texts, composition_, &ink);
  const std::size_t basic_count = symbols.size();
  for (auto& s : complex.symbols) {
    bool inside = false;
    for (std::size_t i = 0; i < basic_count && !inside; ++i) {
      inside = intersect(s.bbox, symbols[i].bbox).area() * 2 > s.bbox.area();
    }
    if (!inside) symbols.push_back(std::move(s));
  }

  // Graph.
  std::vector<Rect> text_boxes, symbol_boxes;
  for (const auto& t : texts) text_boxes.push_back(t.bbox);
  for (const auto& s : symbols) symbol_boxes.push_back(s.bbox);
  const double alpha = cfg_.graph.effective_alpha(k);
  const auto kept = filter_lines(lines, text_boxes, symbol_boxes, alpha);
  PidGraph graph = build_graph(kept, alpha, cfg_.graph);
  graph = assign_edge_labels(std::move(graph), texts, cfg_.graph, &out.warnings);
  graph = propagate_labels(std::move(graph));

  // Aggregation. Texts that read as pipe labels are not offered to symbols.
  const double diagonal = std::hypot(sheet.width(), sheet.height());
  map_symbols_to_graph(symbols, graph, diagonal / 4, &out.warnings);
  std::vector<std::regex> pipe_res;
  for (const auto& r : cfg_.graph.label_regexes) pipe_res.emplace_back(r);
  std::vector<bool> excluded(texts.size(), false);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    for (const auto& re : pipe_res) excluded[i] = excluded[i] || std::regex_search(texts[i].text, re);
  }
  map_symbols_to_text(symbols, texts, cfg_.k_text_neighbors, rules_, excluded);

  // Back to input coordinates.
  Scaler to_input{static_cast<double>(input.width()) / sheet.width(),
                  static_cast<double>(input.height()) / sheet.height()};
  for (auto& v : graph.vertices) v = to_input(v);
  for (auto& s : symbols) s.bbox = to_input(s.bbox);
  auto emitted = emit_result(symbols, graph);
  auto rec = reconcile(emitted, rules_);
  out.result = std::move(rec.result);
  out.report = std::move(rec.report);
  out.graph = std::move(graph);
  for (auto& l : lines) out.lines.push_back(to_input(l));
  for (auto t : texts) {
    t.bbox = to_input(t.bbox);
    out.texts.push_back(std::move(t));
  }
  out.symbols = std::move(symbols);
  for (auto c : circles) {
    c.center = to_input(c.center);
    c.radius = to_input.x(c.radius);
    out.circles.push_back(c);
  }
  for (auto r : rects) {
    for (auto& p : r.corners) p = to_input(p);
    out.rects.push_back(r);
  }
  return out;
}

}  // namespace pidparse
