#include "pidparse/image_io.hpp"

#include <fstream>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "pidparse/error.hpp"

namespace pidparse {

GrayRaster load_gray(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw DecodeError("empty image buffer");
  cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat img;
  try {
    img = cv::imdecode(buf, cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception& e) {
    throw DecodeError(std::string("image decode failed: ") + e.what());
  }
  if (img.empty()) throw DecodeError("unsupported or malformed image");

  if (img.depth() == CV_16U) {
    img.convertTo(img, CV_8U, 1.0 / 257.0);
  } else if (img.depth() != CV_8U) {
    throw DecodeError("unsupported sample depth");
  }
  cv::Mat gray;
  switch (img.channels()) {
    case 1: gray = img; break;
    case 3: cv::cvtColor(img, gray, cv::COLOR_BGR2GRAY); break;
    case 4: cv::cvtColor(img, gray, cv::COLOR_BGRA2GRAY); break;
    default: throw DecodeError("unsupported channel count");
  }
  if (!gray.isContinuous()) gray = gray.clone();
  std::vector<std::uint8_t> data(gray.datastart, gray.dataend);
  return {gray.cols, gray.rows, std::move(data)};
}

GrayRaster load_gray_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return load_gray(bytes);
}

std::vector<std::uint8_t> encode_png(const GrayRaster& r) {
  cv::Mat img(r.height(), r.width(), CV_8UC1, const_cast<std::uint8_t*>(r.data().data()));
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", img, out, {cv::IMWRITE_PNG_COMPRESSION, 6})) {
    throw IoError("PNG encode failed");
  }
  return out;
}

void save_png(const GrayRaster& r, const std::filesystem::path& path) {
  write_file_bytes(path, encode_png(r));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace pidparse
