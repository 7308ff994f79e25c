#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pidparse/raster.hpp"

namespace pidparse {

/// Decodes PNG (8-bit gray, RGB, RGBA; 16-bit is scaled down) or any other format
/// the codec backend understands. Color is reduced by luminance. Throws DecodeError.
GrayRaster load_gray(std::span<const std::uint8_t> bytes);
GrayRaster load_gray_file(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const GrayRaster& r);
void save_png(const GrayRaster& r, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace pidparse
