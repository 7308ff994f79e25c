#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace pidparse::cli {

enum ExitCode : int { kOk = 0, kPartialFailure = 1, kUsageError = 2 };

struct GenerateOptions {
  std::filesystem::path config;  // empty = defaults
  std::filesystem::path out_dir;
  std::optional<int> count;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

struct DigitizeOptions {
  std::vector<std::filesystem::path> sheets;
  std::filesystem::path config;  // empty = defaults
  std::filesystem::path out_dir;
  bool write_graph = false;
  std::optional<int> threads;
  std::optional<int> resize_width;
};

struct EvaluateOptions {
  std::filesystem::path pred_dir;
  std::filesystem::path truth_dir;  // dataset root or a folder of annotation JSON files
  std::filesystem::path out_dir;    // empty = pred_dir
  std::string split;                // "train" / "test" from the manifest; empty = all
  std::vector<double> text_ious{0.5, 0.75, 0.9};
};

struct OverlayOptions {
  std::filesystem::path sheet;
  std::filesystem::path result_dir;
  std::filesystem::path out_png;
  bool compare_hough = false;
};

struct AssetsOptions {
  std::filesystem::path out_dir;
  int sheet_width = 7168;
};

/// Each command reports progress on `out`, problems on `err`, and returns an ExitCode.
int cmd_generate(const GenerateOptions& opt, std::ostream& out, std::ostream& err);
/// Per sheet: <out>/<stem>/{symbols,pipelines,lines,texts}.csv, plus graph.json on request.
int cmd_digitize(const DigitizeOptions& opt, std::ostream& out, std::ostream& err);
/// Writes report.json and confusion.csv.
int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_overlay(const OverlayOptions& opt, std::ostream& out, std::ostream& err);
/// Default pipeline.json, rules.json, composition.json and the template bank.
int cmd_assets(const AssetsOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace pidparse::cli
