#pragma once

// Per-element helpers shared by the serial and omp kernels.

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "lunarkit/kernels.hpp"

namespace lunarkit::kernels::detail {

// Element index in storage order for band-sequential position (b, l, s).
inline std::size_t source_index(const CubeLayout& c, std::size_t b, std::size_t l, std::size_t s) noexcept {
  switch (c.interleave) {
    case Interleave::line_interleaved: return (l * c.bands + b) * c.samples + s;
    case Interleave::pixel_interleaved: return (l * c.samples + s) * c.bands + b;
    case Interleave::band_sequential: break;
  }
  return (b * c.lines + l) * c.samples + s;
}

inline bool valid(double x, std::span<const std::uint8_t> mask, std::size_t i) noexcept {
  return (mask.empty() || mask[i] == 0) && std::isfinite(x);
}

inline std::uint16_t quantize_one(double x, double lo, double hi, std::uint32_t max_value) noexcept {
  if (!(hi > lo) || std::isnan(x)) return 0;
  const double v = (x - lo) * static_cast<double>(max_value) / (hi - lo);
  if (v <= 0.0) return 0;
  if (v >= static_cast<double>(max_value)) return static_cast<std::uint16_t>(max_value);
  return static_cast<std::uint16_t>(std::round(v));
}

}  // namespace lunarkit::kernels::detail
