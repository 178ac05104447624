#pragma once

// Data-parallel inner loops behind raster decoding, statistics, stretch and
// the cycle-consistency penalty. Each kernel exists twice: `omp` is what the
// library calls, `serial` is the plain reference the tests and the benchmark
// compare against. Both take the same arguments and must agree exactly,
// except floating-point sums, where `omp` reduces in fixed blocks of
// kReduceBlock elements so its result does not depend on the thread count.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lunarkit/pds4.hpp"

namespace lunarkit::kernels {

inline constexpr std::size_t kHistogramBins = 65536;
inline constexpr std::size_t kReduceBlock = 4096;
// Below this many elements the omp kernels stay on the calling thread.
inline constexpr std::size_t kParallelThreshold = 1 << 14;

struct CubeLayout {
  std::size_t bands = 1;
  std::size_t lines = 1;
  std::size_t samples = 1;
  Interleave interleave = Interleave::band_sequential;
  ElementType element = ElementType::uint8;

  std::size_t count() const { return bands * lines * samples; }
};

// Exact over valid samples: mask[i] == 0 and finite. count == 0 leaves
// min/max/sum unspecified.
struct Summary {
  double min = 0.0;
  double max = 0.0;
  double sum = 0.0;
  std::size_t count = 0;
};

// kHistogramBins equal bins over [lo, hi]; bin_min/bin_max hold the exact
// extremes of the samples that fell into each non-empty bin.
struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::uint64_t> counts;
  std::vector<double> bin_min;
  std::vector<double> bin_max;

  void reset(double lo_, double hi_);
  std::size_t bin_of(double x) const;
};

double read_element(const std::uint8_t* p, ElementType t) noexcept;

namespace serial {
// payload starts at the first element; out is band-sequential.
void decode(std::span<const std::uint8_t> payload, const CubeLayout& layout, std::span<double> out);
void affine(std::span<const double> in, double factor, double offset, std::span<double> out);
// mask[i] |= (in[i] == value)
void mark_equal(std::span<const double> in, double value, std::span<std::uint8_t> mask);
// mask may be empty (no missing samples).
Summary summarize(std::span<const double> in, std::span<const std::uint8_t> mask);
void histogram(std::span<const double> in, std::span<const std::uint8_t> mask, Histogram& h);
// Linear map [lo, hi] -> [0, max_value], clamped, rounded half away from
// zero. Masked and NaN samples map to 0, as does everything when hi <= lo.
void quantize(std::span<const double> in, std::span<const std::uint8_t> mask, double lo, double hi,
              std::uint32_t max_value, std::span<std::uint16_t> out);
double abs_diff_sum(std::span<const double> a, std::span<const double> b);
}  // namespace serial

namespace omp {
void decode(std::span<const std::uint8_t> payload, const CubeLayout& layout, std::span<double> out);
void affine(std::span<const double> in, double factor, double offset, std::span<double> out);
void mark_equal(std::span<const double> in, double value, std::span<std::uint8_t> mask);
Summary summarize(std::span<const double> in, std::span<const std::uint8_t> mask);
void histogram(std::span<const double> in, std::span<const std::uint8_t> mask, Histogram& h);
void quantize(std::span<const double> in, std::span<const std::uint8_t> mask, double lo, double hi,
              std::uint32_t max_value, std::span<std::uint16_t> out);
double abs_diff_sum(std::span<const double> a, std::span<const double> b);
}  // namespace omp

}  // namespace lunarkit::kernels
