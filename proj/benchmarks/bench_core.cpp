#include <benchmark/benchmark.h>

#include <random>

#include "pidparse/components.hpp"
#include "pidparse/dataset.hpp"
#include "pidparse/glyphs.hpp"
#include "pidparse/hull.hpp"
#include "pidparse/lines.hpp"
#include "pidparse/morphology.hpp"
#include "pidparse/symbol_catalog.hpp"
#include "pidparse/symbol_detect.hpp"
#include "pidparse/text.hpp"

using namespace pidparse;

namespace {

// One small generated sheet shared by the sheet-level benchmarks.
const GeneratedSheet& sample_sheet() {
  static const GeneratedSheet sheet = [] {
    GenConfig cfg;
    cfg.sheet_width = 2400;
    return generate_sheet(cfg, 0);
  }();
  return sheet;
}

BinaryRaster random_raster(int w, int h, double density, unsigned seed) {
  std::mt19937 rng(seed);
  std::bernoulli_distribution on(density);
  BinaryRaster r(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) r.set(x, y, on(rng));
  return r;
}

void BM_OpenLineKernel(benchmark::State& state) {
  const BinaryRaster a = random_raster(1024, 1024, 0.5, 1);
  const LineKernel k{Orientation::horizontal, static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(open(a, k));
  state.SetItemsProcessed(state.iterations() * 1024 * 1024);
}
BENCHMARK(BM_OpenLineKernel)->Arg(5)->Arg(7)->Arg(31);

void BM_ConnectedComponents(benchmark::State& state) {
  const BinaryRaster a = random_raster(1024, 1024, 0.3, 2);
  for (auto _ : state) benchmark::DoNotOptimize(connected_components(a));
}
BENCHMARK(BM_ConnectedComponents);

void BM_ConvexHull(benchmark::State& state) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> d(0, 10000);
  std::vector<Point> pts(static_cast<std::size_t>(state.range(0)));
  for (auto& p : pts) p = {d(rng), d(rng)};
  for (auto _ : state) benchmark::DoNotOptimize(convex_hull(pts));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ConvexHull)->Range(64, 1 << 16)->Complexity(benchmark::oNLogN);

void BM_SolidAndDashedLines(benchmark::State& state) {
  const BinaryRaster ink = binarize(sample_sheet().image);
  const LineDetectConfig cfg;
  const int k = cfg.kernel_length(ink.width(), ink.height());
  for (auto _ : state) {
    const auto solid = detect_solid_lines_detailed(ink, cfg);
    benchmark::DoNotOptimize(detect_dashed_lines(solid.segments, k, cfg, &ink));
  }
}
BENCHMARK(BM_SolidAndDashedLines)->Unit(benchmark::kMillisecond);

void BM_HoughBaseline(benchmark::State& state) {
  const BinaryRaster ink = binarize(sample_sheet().image);
  HoughParams p;
  p.kernel_length = LineDetectConfig{}.kernel_length(ink.width(), ink.height());
  for (auto _ : state) benchmark::DoNotOptimize(detect_lines_hough(ink, p));
}
BENCHMARK(BM_HoughBaseline)->Unit(benchmark::kMillisecond);

void BM_TextPatch(benchmark::State& state) {
  const GrayRaster patch = crop(sample_sheet().image, {400, 300, 800, 800});
  const InkTextDetector det(glyph_scale_for_width(2400));
  const GlyphRecognizer rec;
  TextConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(extract_text(patch, det, rec, cfg));
}
BENCHMARK(BM_TextPatch)->Unit(benchmark::kMillisecond);

void BM_LocalizerPatch(benchmark::State& state) {
  const auto& sheet = sample_sheet();
  const TemplateBank bank = TemplateBank::build(complex_symbol_size(sheet.image.width()));
  const TemplateLocalizer loc(bank);
  Rect around{0, 0, 400, 400};
  for (const auto& s : sheet.annotation.symbols) {
    if (is_complex_class(s.class_id)) {
      around = {s.bbox.x - 150, s.bbox.y - 150, 400, 400};
      break;
    }
  }
  const GrayRaster patch = crop(sheet.image, around);
  for (auto _ : state) benchmark::DoNotOptimize(loc.propose(patch));
}
BENCHMARK(BM_LocalizerPatch)->Unit(benchmark::kMillisecond);

void BM_GenerateSheet(benchmark::State& state) {
  GenConfig cfg;
  cfg.sheet_width = static_cast<int>(state.range(0));
  int i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_sheet(cfg, i++));
}
BENCHMARK(BM_GenerateSheet)->Arg(2400)->Arg(7168)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
