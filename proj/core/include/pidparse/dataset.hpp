#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pidparse/lines.hpp"
#include "pidparse/raster.hpp"

namespace pidparse {

struct NoiseConfig {
  int pixelation_factor = 1;  // 1 = off; else downscale by this factor, nearest-neighbour upscale
  double blur_sigma = 0.0;    // 0 = off
  double salt_pepper_rate = 0.0;

  friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;
};

struct GenConfig {
  std::uint64_t seed = 1;
  int sheet_width = 7168;
  int symbols_min = 24;
  int symbols_max = 36;
  double dashed_fraction = 0.3;
  NoiseConfig noise;
  int count = 1;
  int split_train = 4;
  int split_test = 1;
  int threads = 0;  // 0 = hardware concurrency (capped by PID_THREADS)

  void validate() const;
  [[nodiscard]] int sheet_height() const;
};

struct AnnotatedSymbol {
  int class_id = 0;
  Rect bbox;
  std::string label;
  std::string connected_pipeline_label;
  int rotation = 0;

  friend bool operator==(const AnnotatedSymbol&, const AnnotatedSymbol&) = default;
};

struct AnnotatedLine {
  LineSegment segment;
  std::string pipeline_label;

  friend bool operator==(const AnnotatedLine&, const AnnotatedLine&) = default;
};

struct AnnotatedText {
  std::string text;
  Rect bbox;
  Orientation orientation = Orientation::horizontal;

  friend bool operator==(const AnnotatedText&, const AnnotatedText&) = default;
};

/// Truth pipeline edge: drawn pieces split at junctions.
struct AnnotatedEdge {
  Point p1;
  Point p2;
  LineStyle style = LineStyle::solid;
  std::string label;
  std::vector<int> adjacent;

  friend bool operator==(const AnnotatedEdge&, const AnnotatedEdge&) = default;
};

struct SheetAnnotation {
  int width = 0;
  int height = 0;
  std::vector<AnnotatedSymbol> symbols;
  std::vector<AnnotatedLine> hlines;
  std::vector<AnnotatedLine> vlines;
  std::vector<AnnotatedText> texts;
  std::vector<AnnotatedEdge> pipelines;
  std::vector<std::string> warnings;

  [[nodiscard]] std::string to_json() const;
  /// Throws ConfigError on malformed input.
  static SheetAnnotation from_json(const std::string& text);
  static SheetAnnotation load(const std::filesystem::path& path);

  friend bool operator==(const SheetAnnotation&, const SheetAnnotation&) = default;
};

struct GeneratedSheet {
  GrayRaster image;
  SheetAnnotation annotation;
};

/// Per-index seed: a splitmix64 mix of (seed, index).
std::uint64_t sheet_seed(std::uint64_t seed, int index);

/// Deterministic in (cfg, index). Noise (pixelation, blur, salt-and-pepper, in
/// that order) is applied after the annotation is fixed.
GeneratedSheet generate_sheet(const GenConfig& cfg, int index);

/// Applies the noise chain; the salt-and-pepper pattern depends on `seed`.
GrayRaster apply_noise(const GrayRaster& clean, const NoiseConfig& noise, std::uint64_t seed);

struct DatasetSplit {
  std::vector<int> train;
  std::vector<int> test;
};
/// test gets round(count * test / (train + test)) indices chosen by a seeded shuffle.
DatasetSplit split_dataset(int count, int train, int test, std::uint64_t seed);

/// Writes images/sheet_NNNN.png, annotations/sheet_NNNN.json and manifest.json.
/// Returns the manifest text.
std::string write_dataset(const GenConfig& cfg, const std::filesystem::path& out_dir);

std::string sheet_id(int index);

GenConfig gen_config_from_json(const std::string& text);
std::string gen_config_to_json(const GenConfig& cfg);

}  // namespace pidparse
