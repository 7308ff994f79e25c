#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "pidparse/aggregate.hpp"
#include "pidparse/dataset.hpp"
#include "pidparse/error.hpp"
#include "pidparse/evaluate.hpp"
#include "pidparse/image_io.hpp"
#include "pidparse/parallel.hpp"
#include "pidparse/pipeline.hpp"
#include "pidparse/symbol_catalog.hpp"

namespace pidparse::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed: " + p.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

/// Missing or malformed configuration is a usage error; everything else is a runtime failure.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kPartialFailure;
  }
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  if (path.empty()) return {};
  if (!fs::is_regular_file(path)) throw ConfigError("config not found: " + path.string());
  return PipelineConfig::load(path);
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_generate(const GenerateOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    GenConfig cfg;
    if (!opt.config.empty()) {
      if (!fs::is_regular_file(opt.config)) throw ConfigError("config not found: " + opt.config.string());
      cfg = gen_config_from_json(read_text(opt.config));
    }
    if (opt.count) cfg.count = *opt.count;
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.threads) cfg.threads = *opt.threads;
    cfg.validate();
    const std::string manifest = write_dataset(cfg, opt.out_dir);
    out << "wrote " << cfg.count << " sheets to " << opt.out_dir.string() << "\n";
    (void)manifest;
    return static_cast<int>(kOk);
  });
}

// ---------------------------------------------------------------------------

int cmd_digitize(const DigitizeOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opt.sheets.empty()) throw ConfigError("no input sheets");
    PipelineConfig cfg = load_pipeline_config(opt.config);
    if (opt.threads) cfg.threads = *opt.threads;
    if (opt.resize_width) cfg.resize_width = *opt.resize_width;

    // Sheets run in parallel; the pipeline inside each gets what is left.
    const int total = resolve_threads(cfg.threads);
    const int outer = std::max(1, std::min<int>(total, static_cast<int>(opt.sheets.size())));
    cfg.threads = std::max(1, total / outer);
    const Digitizer digitizer(cfg);
    ensure_dir(opt.out_dir);

    std::mutex io;
    std::vector<std::string> failed;
    parallel_for(opt.sheets.size(), outer, [&](std::size_t i) {
      const fs::path& sheet = opt.sheets[i];
      const std::string id = sheet.stem().string();
      try {
        const GrayRaster image = load_gray_file(sheet);
        const DigitizeOutput res = digitizer.run(image);
        const fs::path dir = opt.out_dir / id;
        ensure_dir(dir);
        save_result(res.result, dir);
        write_text(dir / "lines.csv", lines_csv(res.lines));
        write_text(dir / "texts.csv", texts_csv(res.texts));
        if (opt.write_graph) write_text(dir / "graph.json", res.graph.to_json());
        std::lock_guard lock(io);
        for (const auto& w : res.warnings) err << id << ": warning: " << w << "\n";
        for (const auto& r : res.report) err << id << ": reconcile: symbol " << r.symbol_id << " " << r.action << " " << r.detail << "\n";
        out << id << ": " << res.result.symbols.size() << " symbols, " << res.result.pipelines.size() << " pipelines\n";
      } catch (const std::exception& e) {
        std::lock_guard lock(io);
        err << id << ": error: " << e.what() << "\n";
        failed.push_back(id);
      }
    });
    return static_cast<int>(failed.empty() ? kOk : kPartialFailure);
  });
}

// ---------------------------------------------------------------------------

namespace {

/// Truth annotations by sheet id.
std::map<std::string, fs::path> truth_files(const fs::path& root, const std::string& split) {
  const fs::path dir = fs::is_directory(root / "annotations") ? root / "annotations" : root;
  if (!fs::is_directory(dir)) throw ConfigError("truth directory not found: " + root.string());
  std::set<std::string> keep;
  if (!split.empty()) {
    const json m = json::parse(read_text(root / "manifest.json"));
    if (!m.contains("splits") || !m["splits"].contains(split)) throw ConfigError("manifest has no split '" + split + "'");
    for (const auto& id : m["splits"][split]) keep.insert(id.get<std::string>());
  }
  std::map<std::string, fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".json" || e.path().filename() == "manifest.json") continue;
    const std::string id = e.path().stem().string();
    if (keep.empty() || keep.count(id)) out[id] = e.path();
  }
  return out;
}

SheetPrediction load_prediction(const fs::path& dir) {
  SheetPrediction p;
  p.result = load_result(dir);
  if (fs::exists(dir / "lines.csv")) p.lines = parse_lines_csv(read_text(dir / "lines.csv"));
  if (fs::exists(dir / "texts.csv")) p.texts = parse_texts_csv(read_text(dir / "texts.csv"));
  return p;
}

}  // namespace

int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!fs::is_directory(opt.pred_dir)) throw ConfigError("prediction directory not found: " + opt.pred_dir.string());
    const auto truth = truth_files(opt.truth_dir, opt.split);
    std::set<std::string> pred_ids;
    for (const auto& e : fs::directory_iterator(opt.pred_dir)) {
      if (e.is_directory() && fs::exists(e.path() / "symbols.csv")) pred_ids.insert(e.path().filename().string());
    }

    // An empty prediction set scores every sheet as empty; a partial one is an error.
    std::vector<std::string> missing, extra;
    if (!pred_ids.empty()) {
      for (const auto& [id, path] : truth)
        if (!pred_ids.count(id)) missing.push_back(id);
      for (const auto& id : pred_ids)
        if (!truth.count(id)) extra.push_back(id);
    }

    EvalReport total;
    total.text.ious = opt.text_ious;
    total.text.detected.assign(opt.text_ious.size(), 0);
    for (const auto& [id, path] : truth) {
      if (!pred_ids.empty() && !pred_ids.count(id)) continue;
      const SheetAnnotation ann = SheetAnnotation::load(path);
      const SheetPrediction pred = pred_ids.empty() ? SheetPrediction{} : load_prediction(opt.pred_dir / id);
      total.merge(evaluate_sheet(pred, ann, opt.text_ious));
    }

    const fs::path dest = opt.out_dir.empty() ? opt.pred_dir : opt.out_dir;
    ensure_dir(dest);
    write_text(dest / "report.json", total.to_json());
    write_text(dest / "confusion.csv", total.confusion_csv());
    out << "evaluated " << total.sheets << " sheets; mean F1 " << total.mean_f1() << ", complete lines "
        << total.lines.complete() << ", dashed lines " << total.lines.dashed() << "\n";
    for (const auto& id : missing) err << "missing prediction: " << id << "\n";
    for (const auto& id : extra) err << "no annotation for prediction: " << id << "\n";
    return static_cast<int>(missing.empty() && extra.empty() ? kOk : kPartialFailure);
  });
}

// ---------------------------------------------------------------------------

int cmd_assets(const AssetsOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opt.sheet_width <= 0) throw ConfigError("sheet width must be positive");
    ensure_dir(opt.out_dir);
    PipelineConfig cfg;
    cfg.resize_width = opt.sheet_width;
    cfg.generator.sheet_width = opt.sheet_width;
    cfg.composition_file = "composition.json";
    cfg.template_dir = "templates";
    write_text(opt.out_dir / "pipeline.json", cfg.to_json());
    write_text(opt.out_dir / "rules.json", RuleSet{}.to_json());
    write_text(opt.out_dir / "composition.json", RuleTable::defaults().to_json());
    TemplateBank::build(complex_symbol_size(opt.sheet_width)).save(opt.out_dir / "templates");
    out << "wrote assets to " << opt.out_dir.string() << "\n";
    return static_cast<int>(kOk);
  });
}

}  // namespace pidparse::cli
