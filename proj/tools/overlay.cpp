#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "pidparse/aggregate.hpp"
#include "pidparse/error.hpp"
#include "pidparse/image_io.hpp"
#include "pidparse/lines.hpp"
#include "pidparse/raster.hpp"

namespace pidparse::cli {

namespace fs = std::filesystem;

namespace {

// BGR
const cv::Scalar kSolid{40, 160, 40};
const cv::Scalar kDashed{0, 140, 255};
const cv::Scalar kPipeline{200, 90, 0};
const cv::Scalar kSymbol{30, 30, 220};
const cv::Scalar kHough{180, 0, 180};

cv::Mat to_bgr(const GrayRaster& g) {
  cv::Mat gray(g.height(), g.width(), CV_8UC1, const_cast<std::uint8_t*>(g.data().data()));
  cv::Mat bgr;
  cv::cvtColor(gray, bgr, cv::COLOR_GRAY2BGR);
  return bgr;
}

int thickness_for(const cv::Mat& m) { return std::max(2, std::max(m.cols, m.rows) / 1500); }

void draw_segments(cv::Mat& m, const std::vector<LineSegment>& lines) {
  const int t = thickness_for(m);
  for (const auto& l : lines) {
    cv::line(m, {l.p1.x, l.p1.y}, {l.p2.x, l.p2.y}, l.style == LineStyle::dashed ? kDashed : kSolid, t);
  }
}

void draw_result(cv::Mat& m, const DigitizationResult& r) {
  const int t = thickness_for(m);
  const double font = std::max(0.5, m.cols / 5000.0);
  for (const auto& p : r.pipelines) {
    cv::line(m, {p.p1.x, p.p1.y}, {p.p2.x, p.p2.y}, kPipeline, t);
    if (!p.label.empty()) {
      cv::putText(m, p.label, {(p.p1.x + p.p2.x) / 2, (p.p1.y + p.p2.y) / 2 - 2 * t}, cv::FONT_HERSHEY_SIMPLEX, font,
                  kPipeline, std::max(1, t / 2));
    }
  }
  for (const auto& s : r.symbols) {
    cv::rectangle(m, cv::Rect(s.bbox.x, s.bbox.y, s.bbox.w, s.bbox.h), kSymbol, t);
    const std::string tag = std::to_string(s.class_id) + (s.label.empty() ? "" : " " + s.label);
    cv::putText(m, tag, {s.bbox.x, s.bbox.bottom() + static_cast<int>(30 * font)}, cv::FONT_HERSHEY_SIMPLEX, font,
                kSymbol, std::max(1, t / 2));
  }
}

void write_png(const fs::path& path, const cv::Mat& m) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), m)) throw IoError("cannot write " + path.string());
}

std::string read_if_exists(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int cmd_overlay(const OverlayOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const GrayRaster sheet = load_gray_file(opt.sheet);

    if (opt.compare_hough) {
      const BinaryRaster ink = binarize(sheet);
      const LineDetectConfig lcfg;
      const int k = lcfg.kernel_length(sheet.width(), sheet.height());
      const auto kernel_lines = detect_lines(ink, lcfg);
      HoughParams hp;
      hp.kernel_length = k;
      const auto hough = detect_lines_hough(ink, hp);

      cv::Mat left = to_bgr(sheet), right = to_bgr(sheet);
      draw_segments(left, kernel_lines);
      const int t = thickness_for(right);
      for (const auto& l : hough) cv::line(right, {l.p1.x, l.p1.y}, {l.p2.x, l.p2.y}, kHough, t);
      cv::Mat both;
      cv::hconcat(left, right, both);
      write_png(opt.out_png, both);
      out << "kernel lines " << kernel_lines.size() << ", hough lines " << hough.size() << "\n";
      return kOk;
    }

    DigitizationResult result;
    if (fs::exists(opt.result_dir / "symbols.csv")) result.symbols = parse_symbols_csv(read_if_exists(opt.result_dir / "symbols.csv"));
    if (fs::exists(opt.result_dir / "pipelines.csv")) {
      result.pipelines = parse_pipelines_csv(read_if_exists(opt.result_dir / "pipelines.csv"));
    }
    std::vector<LineSegment> lines;
    if (fs::exists(opt.result_dir / "lines.csv")) lines = parse_lines_csv(read_if_exists(opt.result_dir / "lines.csv"));

    cv::Mat canvas;
    if (result.symbols.empty() && result.pipelines.empty() && lines.empty()) {
      // Nothing to draw: the sheet itself, pixel for pixel.
      canvas = cv::Mat(sheet.height(), sheet.width(), CV_8UC1, const_cast<std::uint8_t*>(sheet.data().data())).clone();
    } else {
      canvas = to_bgr(sheet);
      draw_segments(canvas, lines);
      draw_result(canvas, result);
    }
    write_png(opt.out_png, canvas);
    out << "wrote " << opt.out_png.string() << "\n";
    return kOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kPartialFailure;
  }
}

}  // namespace pidparse::cli
