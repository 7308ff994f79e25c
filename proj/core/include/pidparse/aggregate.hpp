#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pidparse/graph.hpp"
#include "pidparse/symbol.hpp"
#include "pidparse/text.hpp"

namespace pidparse {

/// Scope value matching every class.
inline constexpr int kAllClasses = -1;

struct DomainRule {
  enum class Kind { label_regex, static_label, require_connection };
  int scope = kAllClasses;
  Kind kind = Kind::label_regex;
  std::string payload;

  [[nodiscard]] bool applies_to(int class_id) const { return scope == kAllClasses || scope == class_id; }
  friend bool operator==(const DomainRule&, const DomainRule&) = default;
};

/// JSON: {"rules": [{"scope": 9 | "ALL", "kind": "label_regex" | "static_label" |
/// "require_connection", "payload": "..."}]}
struct RuleSet {
  std::vector<DomainRule> rules;

  /// Throws ConfigError on malformed input or a regex that does not compile.
  static RuleSet from_json(const std::string& text);
  static RuleSet load(const std::filesystem::path& path);
  [[nodiscard]] std::string to_json() const;
  void validate() const;
};

/// Links each symbol to the graph vertex nearest its box center and fills
/// edge_ids with the edges incident to it. Symbols farther than weak_distance
/// are flagged "weak_association" but keep the link.
void map_symbols_to_graph(std::vector<SymbolInstance>& symbols, const PidGraph& graph, double weak_distance,
                          std::vector<std::string>* warnings = nullptr);

/// Letter runs become '@', digit runs '#', everything else is kept.
std::string label_pattern(const std::string& text);

/// Labels symbols from nearby text. Symbols that already carry embedded text
/// keep it and consume that box. Otherwise each symbol considers its k nearest
/// unconsumed texts (center distance): with a label_regex rule for its class
/// the nearest match wins; without one, candidates are ranked by how common
/// their pattern is among the class's candidates, then by distance. Each text
/// is used at most once. Indices in `excluded` are never used.
void map_symbols_to_text(std::vector<SymbolInstance>& symbols, const std::vector<TextBox>& texts, int k,
                         const RuleSet& rules, const std::vector<bool>& excluded = {});

struct SymbolRow {
  int symbol_id = 0;
  int class_id = kOthers;
  Rect bbox;
  std::string label;
  std::vector<int> connected_edge_ids;

  friend bool operator==(const SymbolRow&, const SymbolRow&) = default;
};

struct PipelineRow {
  int edge_id = 0;
  std::string label;
  Point p1;
  Point p2;
  LineStyle style = LineStyle::solid;
  std::vector<int> adjacent_edge_ids;

  friend bool operator==(const PipelineRow&, const PipelineRow&) = default;
};

struct DigitizationResult {
  std::vector<SymbolRow> symbols;
  std::vector<PipelineRow> pipelines;

  friend bool operator==(const DigitizationResult&, const DigitizationResult&) = default;
};

/// Symbols numbered by (y, x) of their boxes; edges keep graph order (by v1,
/// then v2). Adjacency lists name edges that share a vertex.
DigitizationResult emit_result(const std::vector<SymbolInstance>& symbols, const PidGraph& graph);

struct ReconcileEntry {
  int symbol_id = 0;
  std::string action;  // "relabel", "blank", "flag"
  std::string detail;

  friend bool operator==(const ReconcileEntry&, const ReconcileEntry&) = default;
};

struct Reconciled {
  DigitizationResult result;
  std::vector<ReconcileEntry> report;
};

/// Applies rules in order to every symbol they scope: static_label overwrites,
/// label_regex blanks non-empty labels that do not match, require_connection
/// flags symbols without edges.
Reconciled reconcile(const DigitizationResult& result, const RuleSet& rules);

// CSV (UTF-8, LF, header row, RFC 4180 quoting).
std::string symbols_csv(const std::vector<SymbolRow>& rows);
std::string pipelines_csv(const std::vector<PipelineRow>& rows);
/// Throws ConfigError on malformed content.
std::vector<SymbolRow> parse_symbols_csv(const std::string& text);
std::vector<PipelineRow> parse_pipelines_csv(const std::string& text);

/// Detection tables kept next to the result for evaluation:
/// "x1,y1,x2,y2,orientation,style" and "x,y,w,h,orientation,text".
std::string lines_csv(const std::vector<LineSegment>& lines);
std::string texts_csv(const std::vector<TextBox>& texts);
std::vector<LineSegment> parse_lines_csv(const std::string& text);
std::vector<TextBox> parse_texts_csv(const std::string& text);

/// Writes symbols.csv and pipelines.csv into dir.
void save_result(const DigitizationResult& r, const std::filesystem::path& dir);
DigitizationResult load_result(const std::filesystem::path& dir);

}  // namespace pidparse
