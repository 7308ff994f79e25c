// End-to-end acceptance run. One PASS/FAIL line per criterion; exit status 1
// when any criterion fails. Per-class noisy F1 is printed as REPORT lines.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "oracles.hpp"
#include "pidparse/aggregate.hpp"
#include "pidparse/dataset.hpp"
#include "pidparse/evaluate.hpp"
#include "pidparse/graph.hpp"
#include "pidparse/hull.hpp"
#include "pidparse/image_io.hpp"
#include "pidparse/lines.hpp"
#include "pidparse/morphology.hpp"
#include "pidparse/pipeline.hpp"
#include "pidparse/symbol_catalog.hpp"

using namespace pidparse;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << (pass ? "PASS" : "FAIL") << " | " << name << " | " << detail << std::endl;
}

// Runs one criterion; an exception counts as a failure with its message.
void criterion(const std::string& name, const std::function<std::pair<bool, std::string>()>& fn) {
  try {
    const auto [pass, detail] = fn();
    report(pass, name, detail);
  } catch (const std::exception& e) {
    report(false, name, std::string("exception: ") + e.what());
  }
}

std::vector<AnnotatedLine> all_lines(const SheetAnnotation& a) {
  std::vector<AnnotatedLine> out = a.hlines;
  out.insert(out.end(), a.vlines.begin(), a.vlines.end());
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Relative path -> content hash for every regular file under root.
std::map<std::string, std::uint64_t> tree_hashes(const fs::path& root) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = fnv1a(slurp(e.path()));
  return out;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("pidparse_acceptance_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

GenConfig noisy_config(std::uint64_t seed, double salt_pepper) {
  GenConfig g;
  g.seed = seed;
  g.noise.pixelation_factor = 2;
  g.noise.blur_sigma = 0.8;
  g.noise.salt_pepper_rate = salt_pepper;
  return g;
}

// ---------------------------------------------------------------------------

void morphology_oracle() {
  criterion("Morphology oracle: erode/dilate vs brute-force min/max, 200 rasters x 6 kernels", [] {
    const auto t0 = Clock::now();
    const std::vector<LineKernel> kernels{{Orientation::horizontal, 2}, {Orientation::horizontal, 5},
                                          {Orientation::horizontal, 8}, {Orientation::vertical, 3},
                                          {Orientation::vertical, 6},   {Orientation::vertical, 9}};
    std::mt19937 rng(8086);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    long long mismatches = 0;
    for (int r = 0; r < 200; ++r) {
      const double density = 0.2 + 0.6 * u(rng);
      BinaryRaster a(64, 64);
      for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) a.set(x, y, u(rng) < density);
      for (const auto& k : kernels) {
        const auto e = erode(a, k), eo = oracle::min_filter(a, k);
        const auto d = dilate(a, k), dor = oracle::max_filter(a, k);
        for (std::size_t i = 0; i < e.bits().size(); ++i) {
          mismatches += e.bits()[i] != eo.bits()[i];
          mismatches += d.bits()[i] != dor.bits()[i];
        }
      }
    }
    const double t = seconds_since(t0);
    return std::pair{mismatches == 0 && t < 10.0,
                     "mismatching pixels " + std::to_string(mismatches) + ", " + fmt(t, 2) + " s"};
  });
}

void hull_oracle() {
  criterion("Hull oracle: convex_hull vs O(n^4) brute force, 100 sets, n <= 25", [] {
    const auto t0 = Clock::now();
    std::mt19937 rng(2718);
    std::uniform_int_distribution<int> coord(0, 40), count(1, 25);
    int wrong = 0;
    for (int i = 0; i < 100; ++i) {
      std::vector<Point> pts(static_cast<std::size_t>(count(rng)));
      for (auto& p : pts) p = {coord(rng), coord(rng)};
      const auto h = convex_hull(pts);
      if (std::set<Point>(h.begin(), h.end()) != oracle::hull_vertex_set(pts)) ++wrong;
    }
    const double t = seconds_since(t0);
    return std::pair{wrong == 0 && t < 10.0, "differing sets " + std::to_string(wrong) + ", " + fmt(t, 2) + " s"};
  });
}

// Lines on noisy sheets, then the full pipeline on the same sheets for the
// ungated symbol report.
void noisy_sheets(const fs::path& baseline_file) {
  const GenConfig g = noisy_config(3031, 0.005);
  const LineDetectConfig lcfg;
  std::vector<GeneratedSheet> sheets;
  LineEval lines;
  const auto t0 = Clock::now();
  for (int i = 0; i < 20; ++i) {
    sheets.push_back(generate_sheet(g, i));
    const auto& s = sheets.back();
    const BinaryRaster ink = binarize(s.image);
    const int k = lcfg.kernel_length(ink.width(), ink.height());
    lines.merge(line_accuracy(detect_lines(ink, lcfg), all_lines(s.annotation), k));
  }
  const double t = seconds_since(t0);
  report(lines.complete() >= 0.97 && t < 300.0, "Complete-line accuracy >= 0.97 on 20 noisy sheets",
         fmt(lines.complete()) + " (" + std::to_string(lines.complete_correct) + "/" +
             std::to_string(lines.complete_total) + "), " + fmt(t, 1) + " s");
  report(lines.dashed() >= 0.75, "Dashed-line accuracy >= 0.75 on the same sheets",
         fmt(lines.dashed()) + " (" + std::to_string(lines.dashed_correct) + "/" +
             std::to_string(lines.dashed_total) + ")");

  criterion("Noisy symbol F1 within 0.05 of the recorded baseline (per-class values reported)", [&] {
    PipelineConfig cfg;
    const Digitizer d(cfg);
    EvalReport total;
    for (const auto& s : sheets) {
      const auto out = d.run(s.image);
      total.merge(evaluate_sheet({out.result, out.lines, out.texts}, s.annotation));
    }
    for (int c = 1; c <= kClassCount; ++c) {
      const auto it = total.symbols.per_class.find(c);
      const ClassCounts n = it == total.symbols.per_class.end() ? ClassCounts{} : it->second;
      std::cout << "REPORT | noisy F1 class " << c << " | " << fmt(n.f1(), 3) << " (tp " << n.tp << ", fp " << n.fp
                << ", fn " << n.fn << ")\n";
    }
    const double mean = total.mean_f1();
    double baseline = 0.0;
    std::ifstream(baseline_file) >> baseline;
    return std::pair{mean >= baseline - 0.05, "mean F1 " + fmt(mean) + ", baseline " + fmt(baseline)};
  });
}

void hough_robustness() {
  criterion("Hough robustness: kernel recall >= Hough recall on each of 10 sheets at salt-and-pepper 2%", [] {
    GenConfig g;
    g.seed = 4041;
    g.noise.salt_pepper_rate = 0.02;
    const LineDetectConfig lcfg;
    int worse = 0;
    std::string detail;
    for (int i = 0; i < 10; ++i) {
      const auto s = generate_sheet(g, i);
      const BinaryRaster ink = binarize(s.image);
      const int k = lcfg.kernel_length(ink.width(), ink.height());
      HoughParams hp;
      hp.kernel_length = k;
      const double kr = line_accuracy(detect_lines(ink, lcfg), all_lines(s.annotation), k).complete();
      const double hr = line_accuracy(detect_lines_hough(ink, hp), all_lines(s.annotation), k).complete();
      if (kr < hr) ++worse;
      detail += (i ? " " : "") + fmt(kr, 3) + "/" + fmt(hr, 3);
    }
    return std::pair{worse == 0, "kernel/hough per sheet: " + detail};
  });
}

void clean_sheets() {
  GenConfig g;
  g.seed = 2024;
  PipelineConfig cfg;
  const Digitizer d(cfg);
  EvalReport total;
  const auto t0 = Clock::now();
  for (int i = 0; i < 20; ++i) {
    const auto s = generate_sheet(g, i);
    const auto out = d.run(s.image);
    total.merge(evaluate_sheet({out.result, out.lines, out.texts}, s.annotation));
  }
  const double t = seconds_since(t0);

  double min_f1 = 1.0;
  int min_class = 0;
  for (int c = 1; c <= kClassCount; ++c) {
    const auto it = total.symbols.per_class.find(c);
    const double f1 = it == total.symbols.per_class.end() ? 0.0 : it->second.f1();
    if (f1 < min_f1) {
      min_f1 = f1;
      min_class = c;
    }
  }
  report(min_f1 >= 0.90, "Symbols, noise-free: per-class F1 >= 0.90 for all 32 classes",
         "lowest F1 " + fmt(min_f1) + (min_class ? " (class " + std::to_string(min_class) + ")" : "") +
             ", mean " + fmt(total.mean_f1()) + ", 20 sheets in " + fmt(t, 1) + " s");
  report(diagonal_dominant(total.symbols.confusion, 5.0), "Symbols, noise-free: confusion diagonal dominance x5",
         "26x26 matrix over matched pairs");
  report(total.text.detection(0) >= 0.95 && total.text.recognition() >= 0.90,
         "Text, noise-free: detection >= 0.95 at IOU 0.5 and recognition >= 0.90",
         "detection " + fmt(total.text.detection(0)) + " of " + std::to_string(total.text.total) + ", recognition " +
             fmt(total.text.recognition()));
  std::cout << "REPORT | noise-free lines | complete " << fmt(total.lines.complete()) << ", dashed "
            << fmt(total.lines.dashed()) << "\n";
  std::cout << "REPORT | noise-free graph adjacency accuracy | " << fmt(total.graph.accuracy()) << "\n";
}

LineSegment hseg(int x1, int x2, int y) { return make_segment(Orientation::horizontal, x1, x2, y); }
LineSegment vseg(int y1, int y2, int x) { return make_segment(Orientation::vertical, y1, y2, x); }

void graph_fixtures() {
  criterion("Graph fixtures: plus junction, T junction, 3-pipe labeled with BFS stopping rule", [] {
    std::vector<std::string> bad;
    GraphConfig c;
    c.label_regexes = {kPipeLabelRegex};
    const double alpha = 14;

    const auto plus = build_graph({hseg(0, 47, 50), hseg(53, 100, 50), vseg(0, 48, 50), vseg(52, 100, 50)}, alpha, c);
    if (plus.vertices != std::vector<Point>{{0, 50}, {50, 0}, {50, 50}, {50, 100}, {100, 50}}) bad.push_back("plus vertices");
    if (plus.degrees() != std::vector<int>{1, 1, 4, 1, 1}) bad.push_back("plus degrees");
    if (plus.edge_adjacency() != std::vector<std::vector<int>>{{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}})
      bad.push_back("plus adjacency");

    const auto tee = build_graph({hseg(0, 100, 0), vseg(2, 80, 50)}, alpha, c);
    if (tee.vertices != std::vector<Point>{{0, 0}, {50, 0}, {50, 80}, {100, 0}}) bad.push_back("T vertices");
    if (tee.degrees() != std::vector<int>{1, 3, 1, 1}) bad.push_back("T degrees");
    if (tee.edge_adjacency() != std::vector<std::vector<int>>{{1, 2}, {0, 2}, {0, 1}}) bad.push_back("T adjacency");

    // Three collinear pipes with a branch teeing into the first. The second
    // pipe's own label stops the first label at its boundary.
    const std::vector<TextBox> texts{{{10, 84, 80, 12}, "2\"-PL-1001", Orientation::horizontal, 1.0},
                                     {{260, 84, 80, 12}, "3\"-CW-2002", Orientation::horizontal, 1.0}};
    auto g = build_graph({hseg(0, 200, 100), hseg(200, 400, 100), hseg(400, 600, 100), vseg(104, 300, 100)}, alpha, c);
    g = propagate_labels(assign_edge_labels(std::move(g), texts, c));
    if (g.vertices != std::vector<Point>{{0, 100}, {100, 100}, {100, 300}, {200, 100}, {400, 100}, {600, 100}})
      bad.push_back("3-pipe vertices");
    if (g.degrees() != std::vector<int>{1, 3, 1, 2, 2, 1}) bad.push_back("3-pipe degrees");
    if (g.edge_adjacency() != std::vector<std::vector<int>>{{1, 2}, {0, 2}, {0, 1, 3}, {2, 4}, {3}})
      bad.push_back("3-pipe adjacency");
    const std::vector<std::string> want{"2\"-PL-1001", "2\"-PL-1001", "2\"-PL-1001", "3\"-CW-2002", "3\"-CW-2002"};
    const std::vector<LabelSource> src{LabelSource::direct, LabelSource::propagated, LabelSource::propagated,
                                       LabelSource::direct, LabelSource::propagated};
    for (std::size_t e = 0; e < g.edges.size() && e < want.size(); ++e) {
      if (g.edges[e].label != want[e] || g.edges[e].label_source != src[e])
        bad.push_back("3-pipe label of edge " + std::to_string(e));
    }
    std::string detail = bad.empty() ? "all expectations met" : "";
    for (const auto& b : bad) detail += (detail.empty() ? "" : ", ") + b;
    return std::pair{bad.empty(), detail};
  });
}

void determinism() {
  criterion("Determinism: digitize twice gives byte-identical CSVs; fixed-seed generation gives identical hashes", [] {
    TempDir tmp("determinism");
    GenConfig g;
    g.seed = 99;
    save_png(generate_sheet(g, 0).image, tmp.path / "sheet.png");
    std::ostringstream out, err;
    cli::DigitizeOptions d;
    d.sheets = {tmp.path / "sheet.png"};
    d.out_dir = tmp.path / "a";
    const int ra = cli::cmd_digitize(d, out, err);
    d.out_dir = tmp.path / "b";
    const int rb = cli::cmd_digitize(d, out, err);
    const auto ha = tree_hashes(tmp.path / "a"), hb = tree_hashes(tmp.path / "b");
    const bool csv_same = ra == 0 && rb == 0 && ha == hb && ha.size() >= 4;

    g.count = 3;
    write_dataset(g, tmp.path / "d1");
    write_dataset(g, tmp.path / "d2");
    const auto d1 = tree_hashes(tmp.path / "d1"), d2 = tree_hashes(tmp.path / "d2");
    const bool data_same = d1 == d2 && d1.size() == 7;
    return std::pair{csv_same && data_same, std::to_string(ha.size()) + " output files " +
                                                (csv_same ? "identical" : "differ") + "; " +
                                                std::to_string(d1.size()) + " dataset files " +
                                                (data_same ? "identical" : "differ")};
  });
}

void reconcile_idempotence() {
  criterion("Reconciliation idempotence: reconcile twice == reconcile once, 50 random rulesets", [] {
    std::mt19937 rng(5150);
    const std::vector<std::string> labels{"", "A", "PI 12", "V-101", "TK 5", "E-123", "lower", "12-34", "@"};
    const std::vector<std::string> regexes{"^[A-Z]{1,3}[- ][0-9]{1,3}$", "^V-", "[0-9]", "^$", ".*", "^A$"};
    std::uniform_int_distribution<int> cls(1, kClassCount), lab(0, static_cast<int>(labels.size()) - 1),
        re(0, static_cast<int>(regexes.size()) - 1), kind(0, 2), nrules(0, 8), nsym(0, 30), coin(0, 3);
    int broken = 0;
    for (int trial = 0; trial < 50; ++trial) {
      DigitizationResult r;
      const int n = nsym(rng);
      for (int i = 0; i < n; ++i) {
        SymbolRow s{i, cls(rng), {10 * i, 5 * i, 20, 20}, labels[static_cast<std::size_t>(lab(rng))], {}};
        for (int e = 0; e < 3; ++e)
          if (coin(rng) == 0) s.connected_edge_ids.push_back(e + i);
        r.symbols.push_back(s);
      }
      RuleSet rs;
      const int m = nrules(rng);
      for (int k = 0; k < m; ++k) {
        const int scope = coin(rng) == 0 ? kAllClasses : cls(rng);
        switch (kind(rng)) {
          case 0: rs.rules.push_back({scope, DomainRule::Kind::label_regex, regexes[static_cast<std::size_t>(re(rng))]}); break;
          case 1: rs.rules.push_back({scope, DomainRule::Kind::static_label, labels[static_cast<std::size_t>(lab(rng))]}); break;
          default: rs.rules.push_back({scope, DomainRule::Kind::require_connection, ""}); break;
        }
      }
      const auto once = reconcile(r, rs).result;
      if (!(reconcile(once, rs).result == once)) ++broken;
    }
    return std::pair{broken == 0, std::to_string(broken) + " of 50 rulesets not idempotent"};
  });
}

void dataset_scale() {
  criterion("Dataset scale: 100 sheets at width 7168 in < 10 min", [] {
    TempDir tmp("scale");
    GenConfig g;
    g.seed = 7;
    g.count = 100;
    g.sheet_width = 7168;
    const auto t0 = Clock::now();
    write_dataset(g, tmp.path);
    const double t = seconds_since(t0);
    int images = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(tmp.path / "images")) ++images;
    return std::pair{images == 100 && t < 600.0, std::to_string(images) + " images in " + fmt(t, 1) + " s"};
  });
  criterion("Dataset scale: 500-sheet configuration splits 400 train / 100 test", [] {
    const GenConfig g = gen_config_from_json(slurp(fs::path(PIDPARSE_SOURCE_DIR) / "data" / "pipeline.json"));
    const DatasetSplit s = split_dataset(g.count, g.split_train, g.split_test, g.seed);
    std::set<int> all(s.train.begin(), s.train.end());
    all.insert(s.test.begin(), s.test.end());
    const bool ok = g.count == 500 && s.train.size() == 400 && s.test.size() == 100 && all.size() == 500 &&
                    *all.begin() == 0 && *all.rbegin() == 499;
    return std::pair{ok, "count " + std::to_string(g.count) + ", train " + std::to_string(s.train.size()) +
                             ", test " + std::to_string(s.test.size())};
  });
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path baseline = argc > 1 ? fs::path(argv[1]) : fs::path(PIDPARSE_ACCEPTANCE_BASELINE);
  const auto t0 = Clock::now();
  morphology_oracle();
  hull_oracle();
  graph_fixtures();
  reconcile_idempotence();
  determinism();
  hough_robustness();
  noisy_sheets(baseline);
  clean_sheets();
  dataset_scale();
  std::cout << (failures ? "FAILED" : "ALL PASSED") << " | " << failures << " failing | " << fmt(seconds_since(t0), 1)
            << " s total" << std::endl;
  return failures ? 1 : 0;
}
