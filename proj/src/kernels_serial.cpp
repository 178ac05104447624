#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>

#include "kernels_common.hpp"
#include "lunarkit/kernels.hpp"

namespace lunarkit::kernels {

namespace {

template <typename U>
U load(const std::uint8_t* p, bool big_endian) noexcept {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    const std::size_t shift = big_endian ? (sizeof(U) - 1 - i) * 8 : i * 8;
    v |= static_cast<U>(static_cast<U>(p[i]) << shift);
  }
  return v;
}

}  // namespace

double read_element(const std::uint8_t* p, ElementType t) noexcept {
  const bool be = is_big_endian(t);
  switch (t) {
    case ElementType::uint8: return p[0];
    case ElementType::int8: return static_cast<std::int8_t>(p[0]);
    case ElementType::uint16_be:
    case ElementType::uint16_le: return load<std::uint16_t>(p, be);
    case ElementType::int16_be:
    case ElementType::int16_le: return static_cast<std::int16_t>(load<std::uint16_t>(p, be));
    case ElementType::uint32_be:
    case ElementType::uint32_le: return load<std::uint32_t>(p, be);
    case ElementType::int32_be:
    case ElementType::int32_le: return static_cast<std::int32_t>(load<std::uint32_t>(p, be));
    case ElementType::float32_be:
    case ElementType::float32_le: return std::bit_cast<float>(load<std::uint32_t>(p, be));
    case ElementType::float64_be:
    case ElementType::float64_le: return std::bit_cast<double>(load<std::uint64_t>(p, be));
  }
  return 0.0;
}

void Histogram::reset(double lo_, double hi_) {
  lo = lo_;
  hi = hi_;
  counts.assign(kHistogramBins, 0);
  bin_min.assign(kHistogramBins, std::numeric_limits<double>::infinity());
  bin_max.assign(kHistogramBins, -std::numeric_limits<double>::infinity());
}

std::size_t Histogram::bin_of(double x) const {
  if (!(hi > lo)) return 0;
  const double pos = (x - lo) / (hi - lo) * static_cast<double>(kHistogramBins);
  if (pos <= 0.0) return 0;
  return std::min(kHistogramBins - 1, static_cast<std::size_t>(pos));
}

namespace serial {

void decode(std::span<const std::uint8_t> payload, const CubeLayout& c, std::span<double> out) {
  const std::size_t width = element_width(c.element);
  std::size_t o = 0;
  for (std::size_t b = 0; b < c.bands; ++b)
    for (std::size_t l = 0; l < c.lines; ++l)
      for (std::size_t s = 0; s < c.samples; ++s)
        out[o++] = read_element(payload.data() + detail::source_index(c, b, l, s) * width, c.element);
}

void affine(std::span<const double> in, double factor, double offset, std::span<double> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * factor + offset;
}

void mark_equal(std::span<const double> in, double value, std::span<std::uint8_t> mask) {
  for (std::size_t i = 0; i < in.size(); ++i) mask[i] |= static_cast<std::uint8_t>(in[i] == value);
}

Summary summarize(std::span<const double> in, std::span<const std::uint8_t> mask) {
  Summary s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (!detail::valid(in[i], mask, i)) continue;
    s.min = std::min(s.min, in[i]);
    s.max = std::max(s.max, in[i]);
    s.sum += in[i];
    ++s.count;
  }
  return s;
}

void histogram(std::span<const double> in, std::span<const std::uint8_t> mask, Histogram& h) {
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (!detail::valid(in[i], mask, i)) continue;
    const std::size_t b = h.bin_of(in[i]);
    ++h.counts[b];
    h.bin_min[b] = std::min(h.bin_min[b], in[i]);
    h.bin_max[b] = std::max(h.bin_max[b], in[i]);
  }
}

void quantize(std::span<const double> in, std::span<const std::uint8_t> mask, double lo, double hi,
              std::uint32_t max_value, std::span<std::uint16_t> out) {
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = (mask.empty() || mask[i] == 0) ? detail::quantize_one(in[i], lo, hi, max_value) : 0;
  }
}

double abs_diff_sum(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum;
}

}  // namespace serial
}  // namespace lunarkit::kernels
