#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lunarkit/kernels.hpp"
#include "lunarkit/pds4.hpp"

namespace lunarkit {

enum class ValueDomain { raw_integer, physical_real };

// Band-sequential samples: index = (band * height + line) * width + sample.
struct ImageRaster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t bands = 1;
  std::vector<double> samples;
  // Empty, or one flag per sample (1 = missing).
  std::vector<std::uint8_t> missing;
  ValueDomain domain = ValueDomain::raw_integer;

  std::size_t size() const { return width * height * bands; }
  std::size_t index(std::size_t band, std::size_t line, std::size_t sample) const {
    return (band * height + line) * width + sample;
  }
  bool is_missing(std::size_t i) const { return !missing.empty() && missing[i] != 0; }
};

struct DecodeReport {
  std::uint64_t expected_bytes = 0;
  std::uint64_t trailing_bytes = 0;  // payload beyond the array (record padding)
  std::size_t non_finite = 0;        // NaN/Inf floats, kept in the samples
};

struct Decoded {
  ImageRaster raster;
  DecodeReport report;
};

// `file` is the whole data file; the array starts at d.offset_bytes.
// Throws Error{PayloadTooShort} naming expected and actual byte counts.
Decoded decode_with_report(const ArrayDescriptor& d, std::span<const std::uint8_t> file);
ImageRaster decode(const ArrayDescriptor& d, std::span<const std::uint8_t> file);

// sample = raw * scaling_factor + value_offset. Samples equal to
// missing_constant (compared before scaling) join the missing mask.
ImageRaster apply_scaling(const ImageRaster& r, double scaling_factor, double value_offset,
                          std::optional<double> missing_constant);

class RasterStats {
 public:
  double min() const { return summary_.min; }
  double max() const { return summary_.max; }
  double mean() const { return summary_.sum / static_cast<double>(summary_.count); }
  std::size_t count() const { return summary_.count; }

  // Linear interpolation between order statistics at rank p/100 * (count-1),
  // the order statistics read from the histogram (exact when a bin holds a
  // single distinct value, otherwise within one bin width).
  double percentile(double p) const;
  double bin_width() const;

 private:
  friend RasterStats stats(const ImageRaster& r);
  double order_statistic(std::uint64_t rank) const;

  kernels::Summary summary_;
  kernels::Histogram histogram_;
  std::vector<std::uint64_t> cumulative_;  // samples in bins [0, b]
};

// Statistics over non-missing finite samples. Throws Error{AllMissing}.
RasterStats stats(const ImageRaster& r);

}  // namespace lunarkit
