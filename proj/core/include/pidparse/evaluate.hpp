#pragma once

#include <map>
#include <string>
#include <vector>

#include "pidparse/aggregate.hpp"
#include "pidparse/dataset.hpp"

namespace pidparse {

struct ClassCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;

  [[nodiscard]] double precision() const;
  [[nodiscard]] double recall() const;
  /// 2PR / (P + R), 0 when P + R = 0.
  [[nodiscard]] double f1() const;
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

/// Rows and columns 0..25: OTHERS then the complex classes. Row = truth, column = prediction.
inline constexpr int kConfusionSize = kComplexClassCount + 1;

struct SymbolEval {
  std::map<int, ClassCounts> per_class;
  std::vector<std::vector<int>> confusion = std::vector<std::vector<int>>(kConfusionSize, std::vector<int>(kConfusionSize, 0));

  void merge(const SymbolEval& other);
  friend bool operator==(const SymbolEval&, const SymbolEval&) = default;
};

/// Greedy one-to-one matching over pairs with IOU > iou_min, by descending IOU.
/// A matched pair is a TP when class and label agree exactly; otherwise it is a
/// FP for the predicted class and a FN for the true class. Unmatched
/// predictions are FP, unmatched truths FN. Every matched pair whose classes are
/// both in 0..25 is counted in the confusion matrix.
SymbolEval match_symbols(const std::vector<SymbolRow>& pred, const std::vector<AnnotatedSymbol>& truth,
                         double iou_min = 0.75);

struct LineEval {
  int complete_correct = 0;
  int complete_total = 0;
  int dashed_correct = 0;
  int dashed_total = 0;

  [[nodiscard]] double complete() const;  // 1 when there is nothing to find
  [[nodiscard]] double dashed() const;
  void merge(const LineEval& other);
  friend bool operator==(const LineEval&, const LineEval&) = default;
};

/// A truth line is correct when some prediction with the same orientation and
/// style has both endpoints within tol (Euclidean, p1 to p1 and p2 to p2).
LineEval line_accuracy(const std::vector<LineSegment>& pred, const std::vector<AnnotatedLine>& truth, int tol);

struct TextEval {
  std::vector<double> ious;
  std::vector<int> detected;  // per entry of ious
  int total = 0;
  int recognized = 0;        // exact string matches among matches at recognition_iou
  int recognition_pool = 0;  // matches at recognition_iou

  [[nodiscard]] double detection(std::size_t i = 0) const;
  [[nodiscard]] double recognition() const;
  void merge(const TextEval& other);
  friend bool operator==(const TextEval&, const TextEval&) = default;
};

/// Detection at each IOU: greedy one-to-one matching with IOU >= t, fraction of
/// truth boxes matched. Recognition: exact-string fraction of the matches at
/// recognition_iou.
TextEval text_metrics(const std::vector<TextBox>& pred, const std::vector<AnnotatedText>& truth,
                      const std::vector<double>& ious = {0.5}, double recognition_iou = 0.5);

struct GraphEval {
  int correct = 0;
  int total = 0;

  [[nodiscard]] double accuracy() const;  // 0 for an empty truth
  void merge(const GraphEval& other);
  friend bool operator==(const GraphEval&, const GraphEval&) = default;
};

/// Truth edges are matched one-to-one to predicted edges whose endpoints are
/// both within tol (either direction), nearest first. A truth edge is correct
/// when it is matched, carries the same label, and its neighbours map exactly
/// onto the matched edge's adjacency list.
GraphEval graph_adjacency_accuracy(const std::vector<PipelineRow>& pred, const std::vector<AnnotatedEdge>& truth,
                                   int tol);

/// What a digitized sheet contributes to evaluation. Lines and texts are
/// optional; without them the line and text metrics see empty predictions.
struct SheetPrediction {
  DigitizationResult result;
  std::vector<LineSegment> lines;
  std::vector<TextBox> texts;
};

struct EvalReport {
  int sheets = 0;
  SymbolEval symbols;
  LineEval lines;
  TextEval text;
  GraphEval graph;

  void merge(const EvalReport& other);
  [[nodiscard]] std::string to_json() const;
  /// Header "truth\pred,OTHERS,1,...,25"; one row per truth class.
  [[nodiscard]] std::string confusion_csv() const;
  [[nodiscard]] double mean_f1() const;
};

/// Line and graph tolerance is the kernel length for the annotated sheet size.
EvalReport evaluate_sheet(const SheetPrediction& pred, const SheetAnnotation& truth,
                          const std::vector<double>& text_ious = {0.5});

/// Each diagonal entry of a truth row is at least `factor` times every
/// off-diagonal entry of that row (rows without counts pass).
bool diagonal_dominant(const std::vector<std::vector<int>>& confusion, double factor = 5.0);

}  // namespace pidparse
