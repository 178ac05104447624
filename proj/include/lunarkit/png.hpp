#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "lunarkit/raster.hpp"

namespace lunarkit {

enum class StretchMethod { none, minmax, percentile };

struct StretchSpec {
  StretchMethod method = StretchMethod::percentile;
  double p_lo = 0.5;
  double p_hi = 99.5;
  int depth = 8;  // 8 or 16

  static StretchSpec none(int depth = 8) { return {StretchMethod::none, 0.0, 100.0, depth}; }
  static StretchSpec minmax(int depth = 8) { return {StretchMethod::minmax, 0.0, 100.0, depth}; }
  static StretchSpec percentile(double lo, double hi, int depth = 8) {
    return {StretchMethod::percentile, lo, hi, depth};
  }

  std::uint32_t max_value() const { return depth == 16 ? 65535u : 255u; }
  std::string describe() const;
};

// "minmax" | "none" | "pLO,HI". Throws Error{InvalidArgument}.
StretchSpec parse_stretch(std::string_view text, int depth);

// Integer image at 8 or 16 bits, band-sequential like ImageRaster.
struct QuantizedImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t bands = 1;
  int depth = 8;
  std::vector<std::uint16_t> samples;
  double lo = 0.0;  // source value mapped to 0
  double hi = 0.0;  // source value mapped to max
};

// Linear [lo, hi] -> [0, 2^depth - 1], clamped, rounded half away from zero.
// Missing samples and constant rasters map to 0.
// Throws Error{AllMissing, RangeError, InvalidArgument}.
QuantizedImage stretch(const ImageRaster& r, const StretchSpec& spec);

// Grayscale (1 band) or truecolor (3 bands), no interlace, one tEXt chunk
// "Source" when source_id is non-empty. Output is a pure function of the
// input. Throws Error{UnsupportedBands, InvalidArgument}.
std::vector<std::uint8_t> encode_png(const QuantizedImage& img, std::string_view source_id = {});
// Throws Error{IoError}; returns bytes written.
std::size_t write_png(const QuantizedImage& img, std::ostream& out, std::string_view source_id = {});
std::size_t write_png(const QuantizedImage& img, const std::filesystem::path& path, std::string_view source_id = {});

struct PngInfo {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::size_t channels() const;
};

// Reads just the signature and IHDR. Throws Error{IoError, InvalidArgument}.
PngInfo read_png_info(const std::filesystem::path& path);

}  // namespace lunarkit
