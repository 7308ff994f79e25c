#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "pidparse/aggregate.hpp"
#include "pidparse/dataset.hpp"
#include "pidparse/graph.hpp"
#include "pidparse/lines.hpp"
#include "pidparse/shapes.hpp"
#include "pidparse/symbol_detect.hpp"
#include "pidparse/text.hpp"

namespace pidparse {

/// Default pipe-label grammar, e.g. 4"-PL-1024.
inline constexpr const char* kPipeLabelRegex = R"(^[0-9]+"-[A-Z]{2}-[0-9]{4}$)";

/// All module settings in one JSON document with per-module sections:
/// {"resize_width", "k_text_neighbors", "threads", "rules_file", "composition_file",
///  "template_dir", "lines", "text", "shapes", "symbols", "graph", "generator"}.
/// Absent keys keep their defaults; relative paths resolve against the file's directory.
struct PipelineConfig {
  int resize_width = 7168;  // 0 keeps the input size
  int k_text_neighbors = 5;
  int threads = 0;          // 0 = hardware concurrency, capped by PID_THREADS
  std::filesystem::path rules_file;        // domain rules; empty = none
  std::filesystem::path composition_file;  // basic-shape rule table; empty = built-in
  std::filesystem::path template_dir;      // template bank; empty = rendered from the catalog
  LineDetectConfig lines;
  TextConfig text;
  ShapeConfig shapes;
  SymbolDetectConfig symbols;
  GraphConfig graph{0.0, 0.5, 50.0, 2, {kPipeLabelRegex}};
  GenConfig generator;

  void validate() const;
  /// Throws ConfigError on malformed input or invalid values.
  static PipelineConfig from_json(const std::string& text, const std::filesystem::path& base_dir = {});
  static PipelineConfig load(const std::filesystem::path& path);
  [[nodiscard]] std::string to_json() const;
};

/// Everything one sheet produced, in input-image coordinates.
struct DigitizeOutput {
  DigitizationResult result;  // after reconciliation
  std::vector<ReconcileEntry> report;
  PidGraph graph;
  std::vector<LineSegment> lines;  // solid and dashed, before filtering
  std::vector<TextBox> texts;
  std::vector<SymbolInstance> symbols;
  std::vector<Circle> circles;
  std::vector<RectShape> rects;
  std::vector<std::string> warnings;
};

/// Holds the loaded models and rules so a batch reuses them.
class Digitizer {
 public:
  explicit Digitizer(PipelineConfig cfg);
  ~Digitizer();
  Digitizer(const Digitizer&) = delete;
  Digitizer& operator=(const Digitizer&) = delete;

  /// resize -> lines -> text -> shapes -> symbols -> graph -> aggregate -> reconcile.
  [[nodiscard]] DigitizeOutput run(const GrayRaster& sheet) const;
  [[nodiscard]] const PipelineConfig& config() const { return cfg_; }

  struct Models;  // opaque; defined in the implementation

 private:
  PipelineConfig cfg_;
  RuleSet rules_;
  RuleTable composition_;
  std::unique_ptr<Models> models_;  // null when resize_width = 0 (built per sheet)
};

}  // namespace pidparse
