#include "pidparse/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>
#include <tuple>

namespace pidparse {

using nlohmann::json;

double ClassCounts::precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp); }
double ClassCounts::recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn); }
double ClassCounts::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2 * p * r / (p + r);
}

namespace {

struct Pair {
  double score;
  int i, j;
};

/// One-to-one greedy pick; `better` orders candidate pairs best first.
template <typename Better>
std::vector<std::pair<int, int>> greedy(std::vector<Pair> pairs, Better better) {
  std::sort(pairs.begin(), pairs.end(), better);
  std::set<int> used_i, used_j;
  std::vector<std::pair<int, int>> out;
  for (const auto& p : pairs) {
    if (used_i.count(p.i) || used_j.count(p.j)) continue;
    used_i.insert(p.i);
    used_j.insert(p.j);
    out.emplace_back(p.i, p.j);
  }
  return out;
}

bool by_score_desc(const Pair& a, const Pair& b) { return std::tie(b.score, a.i, a.j) < std::tie(a.score, b.i, b.j); }
bool by_score_asc(const Pair& a, const Pair& b) { return std::tie(a.score, a.i, a.j) < std::tie(b.score, b.i, b.j); }

double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

void SymbolEval::merge(const SymbolEval& o) {
  for (const auto& [c, n] : o.per_class) {
    auto& m = per_class[c];
    m.tp += n.tp;
    m.fp += n.fp;
    m.fn += n.fn;
  }
  for (int r = 0; r < kConfusionSize; ++r)
    for (int c = 0; c < kConfusionSize; ++c) confusion[r][c] += o.confusion[r][c];
}

SymbolEval match_symbols(const std::vector<SymbolRow>& pred, const std::vector<AnnotatedSymbol>& truth,
                         double iou_min) {
  SymbolEval e;
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < pred.size(); ++i)
    for (std::size_t j = 0; j < truth.size(); ++j) {
      const double v = iou(pred[i].bbox, truth[j].bbox);
      if (v > iou_min) pairs.push_back({v, static_cast<int>(i), static_cast<int>(j)});
    }
  std::vector<bool> pred_used(pred.size(), false), truth_used(truth.size(), false);
  for (const auto& [i, j] : greedy(std::move(pairs), by_score_desc)) {
    pred_used[i] = truth_used[j] = true;
    const auto& p = pred[i];
    const auto& t = truth[j];
    if (p.class_id == t.class_id && p.label == t.label) {
      ++e.per_class[t.class_id].tp;
    } else {
      ++e.per_class[p.class_id].fp;
      ++e.per_class[t.class_id].fn;
    }
    if (p.class_id >= 0 && p.class_id < kConfusionSize && t.class_id >= 0 && t.class_id < kConfusionSize) {
      ++e.confusion[t.class_id][p.class_id];
    }
  }
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (!pred_used[i]) ++e.per_class[pred[i].class_id].fp;
  for (std::size_t j = 0; j < truth.size(); ++j)
    if (!truth_used[j]) ++e.per_class[truth[j].class_id].fn;
  return e;
}

double LineEval::complete() const {
  return complete_total == 0 ? 1.0 : static_cast<double>(complete_correct) / complete_total;
}
double LineEval::dashed() const { return dashed_total == 0 ? 1.0 : static_cast<double>(dashed_correct) / dashed_total; }
void LineEval::merge(const LineEval& o) {
  complete_correct += o.complete_correct;
  complete_total += o.complete_total;
  dashed_correct += o.dashed_correct;
  dashed_total += o.dashed_total;
}

LineEval line_accuracy(const std::vector<LineSegment>& pred, const std::vector<AnnotatedLine>& truth, int tol) {
  LineEval e;
  for (const auto& t : truth) {
    const auto& s = t.segment;
    const bool ok = std::any_of(pred.begin(), pred.end(), [&](const LineSegment& p) {
      return p.orientation == s.orientation && p.style == s.style && dist(p.p1, s.p1) <= tol && dist(p.p2, s.p2) <= tol;
    });
    if (s.style == LineStyle::solid) {
      ++e.complete_total;
      e.complete_correct += ok;
    } else {
      ++e.dashed_total;
      e.dashed_correct += ok;
    }
  }
  return e;
}

double TextEval::detection(std::size_t i) const {
  if (total == 0) return 1.0;
  return i < detected.size() ? static_cast<double>(detected[i]) / total : 0.0;
}
double TextEval::recognition() const {
  return recognition_pool == 0 ? (total == 0 ? 1.0 : 0.0) : static_cast<double>(recognized) / recognition_pool;
}
void TextEval::merge(const TextEval& o) {
  if (ious.empty()) {
    ious = o.ious;
    detected.assign(o.detected.size(), 0);
  }
  for (std::size_t i = 0; i < detected.size() && i < o.detected.size(); ++i) detected[i] += o.detected[i];
  total += o.total;
  recognized += o.recognized;
  recognition_pool += o.recognition_pool;
}

TextEval text_metrics(const std::vector<TextBox>& pred, const std::vector<AnnotatedText>& truth,
                      const std::vector<double>& ious, double recognition_iou) {
  TextEval e;
  e.ious = ious;
  e.total = static_cast<int>(truth.size());
  auto match = [&](double t) {
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < pred.size(); ++i)
      for (std::size_t j = 0; j < truth.size(); ++j) {
        const double v = iou(pred[i].bbox, truth[j].bbox);
        if (v >= t && v > 0) pairs.push_back({v, static_cast<int>(i), static_cast<int>(j)});
      }
    return greedy(std::move(pairs), by_score_desc);
  };
  for (double t : ious) e.detected.push_back(static_cast<int>(match(t).size()));
  for (const auto& [i, j] : match(recognition_iou)) {
    ++e.recognition_pool;
    e.recognized += pred[i].text == truth[j].text;
  }
  return e;
}

double GraphEval::accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
void GraphEval::merge(const GraphEval& o) {
  correct += o.correct;
  total += o.total;
}

GraphEval graph_adjacency_accuracy(const std::vector<PipelineRow>& pred, const std::vector<AnnotatedEdge>& truth,
                                   int tol) {
  GraphEval e;
  e.total = static_cast<int>(truth.size());
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < pred.size(); ++i)
    for (std::size_t j = 0; j < truth.size(); ++j) {
      const auto& p = pred[i];
      const auto& t = truth[j];
      const double fwd = std::max(dist(p.p1, t.p1), dist(p.p2, t.p2));
      const double rev = std::max(dist(p.p1, t.p2), dist(p.p2, t.p1));
      const double d = std::min(fwd, rev);
      if (d <= tol) pairs.push_back({d, static_cast<int>(i), static_cast<int>(j)});
    }
  std::vector<int> pred_of(truth.size(), -1);
  for (const auto& [i, j] : greedy(std::move(pairs), by_score_asc)) pred_of[j] = i;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    const int i = pred_of[j];
    if (i < 0 || pred[i].label != truth[j].label) continue;
    std::set<int> want;
    bool mapped = true;
    for (int n : truth[j].adjacent) {
      if (n < 0 || n >= static_cast<int>(truth.size()) || pred_of[n] < 0) {
        mapped = false;
        break;
      }
      want.insert(pred[pred_of[n]].edge_id);
    }
    const std::set<int> got(pred[i].adjacent_edge_ids.begin(), pred[i].adjacent_edge_ids.end());
    e.correct += mapped && want == got;
  }
  return e;
}

void EvalReport::merge(const EvalReport& o) {
  sheets += o.sheets;
  symbols.merge(o.symbols);
  lines.merge(o.lines);
  text.merge(o.text);
  graph.merge(o.graph);
}

double EvalReport::mean_f1() const {
  double sum = 0;
  int n = 0;
  for (const auto& [c, counts] : symbols.per_class) {
    if (c == kOthers) continue;
    sum += counts.f1();
    ++n;
  }
  return n ? sum / n : 0.0;
}

std::string EvalReport::to_json() const {
  json j;
  j["sheets"] = sheets;
  json pc = json::object();
  for (const auto& [c, n] : symbols.per_class) {
    pc[std::to_string(c)] = {{"name", class_name(c)}, {"tp", n.tp},           {"fp", n.fp},
                             {"fn", n.fn},            {"precision", n.precision()}, {"recall", n.recall()},
                             {"f1", n.f1()}};
  }
  j["per_class"] = pc;
  j["mean_f1"] = mean_f1();
  j["confusion"] = symbols.confusion;
  j["line_accuracy"] = {{"complete", lines.complete()},
                        {"dashed", lines.dashed()},
                        {"complete_counts", {lines.complete_correct, lines.complete_total}},
                        {"dashed_counts", {lines.dashed_correct, lines.dashed_total}}};
  json det = json::array();
  for (std::size_t i = 0; i < text.ious.size(); ++i) det.push_back({{"iou", text.ious[i]}, {"accuracy", text.detection(i)}});
  j["text"] = {{"detection", det}, {"recognition_acc", text.recognition()}, {"total", text.total}};
  j["graph_adjacency_acc"] = graph.accuracy();
  j["graph_counts"] = {graph.correct, graph.total};
  return j.dump(2) + "\n";
}

std::string EvalReport::confusion_csv() const {
  std::string out = "truth\\pred";
  for (int c = 0; c < kConfusionSize; ++c) out += "," + (c == kOthers ? std::string("OTHERS") : std::to_string(c));
  out += "\n";
  for (int r = 0; r < kConfusionSize; ++r) {
    out += r == kOthers ? std::string("OTHERS") : std::to_string(r);
    for (int c = 0; c < kConfusionSize; ++c) out += "," + std::to_string(symbols.confusion[r][c]);
    out += "\n";
  }
  return out;
}

EvalReport evaluate_sheet(const SheetPrediction& pred, const SheetAnnotation& truth,
                          const std::vector<double>& text_ious) {
  EvalReport r;
  r.sheets = 1;
  const int tol = LineDetectConfig{}.kernel_length(truth.width, truth.height);
  r.symbols = match_symbols(pred.result.symbols, truth.symbols);
  std::vector<AnnotatedLine> lines = truth.hlines;
  lines.insert(lines.end(), truth.vlines.begin(), truth.vlines.end());
  r.lines = line_accuracy(pred.lines, lines, tol);
  r.text = text_metrics(pred.texts, truth.texts, text_ious);
  r.graph = graph_adjacency_accuracy(pred.result.pipelines, truth.pipelines, tol);
  return r;
}

bool diagonal_dominant(const std::vector<std::vector<int>>& confusion, double factor) {
  for (std::size_t r = 0; r < confusion.size(); ++r) {
    for (std::size_t c = 0; c < confusion[r].size(); ++c) {
      if (c != r && confusion[r][r] < factor * confusion[r][c]) return false;
    }
  }
  return true;
}

}  // namespace pidparse
