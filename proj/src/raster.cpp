#include "lunarkit/raster.hpp"

#include <algorithm>
#include <cmath>

#include "lunarkit/error.hpp"

namespace lunarkit {

Decoded decode_with_report(const ArrayDescriptor& d, std::span<const std::uint8_t> file) {
  if (d.axes.size() != 2 && d.axes.size() != 3) {
    fail(ErrorCode::BadAxisNumbering, "descriptor must have 2 or 3 axes");
  }
  const std::uint64_t expected = expected_payload_bytes(d);
  const std::uint64_t available = file.size() > d.offset_bytes ? file.size() - d.offset_bytes : 0;
  if (available < expected) {
    fail(ErrorCode::PayloadTooShort, "expected " + std::to_string(expected) + " bytes at offset " +
                                         std::to_string(d.offset_bytes) + ", found " + std::to_string(available));
  }

  kernels::CubeLayout layout;
  layout.bands = static_cast<std::size_t>(d.bands());
  layout.lines = static_cast<std::size_t>(d.lines());
  layout.samples = static_cast<std::size_t>(d.samples());
  layout.interleave = d.axes.size() == 3 ? d.interleave : Interleave::band_sequential;
  layout.element = d.element;

  Decoded out;
  ImageRaster& r = out.raster;
  r.width = layout.samples;
  r.height = layout.lines;
  r.bands = layout.bands;
  r.domain = ValueDomain::raw_integer;
  r.samples.resize(layout.count());
  kernels::omp::decode(file.subspan(static_cast<std::size_t>(d.offset_bytes), static_cast<std::size_t>(expected)),
                       layout, r.samples);

  out.report.expected_bytes = expected;
  out.report.trailing_bytes = available - expected;
  if (is_float(d.element)) {
    out.report.non_finite = static_cast<std::size_t>(
        std::count_if(r.samples.begin(), r.samples.end(), [](double v) { return !std::isfinite(v); }));
  }
  return out;
}

ImageRaster decode(const ArrayDescriptor& d, std::span<const std::uint8_t> file) {
  return decode_with_report(d, file).raster;
}

ImageRaster apply_scaling(const ImageRaster& r, double scaling_factor, double value_offset,
                          std::optional<double> missing_constant) {
  ImageRaster out;
  out.width = r.width;
  out.height = r.height;
  out.bands = r.bands;
  out.domain = ValueDomain::physical_real;
  out.missing = r.missing;
  if (missing_constant) {
    if (out.missing.empty()) out.missing.assign(r.samples.size(), 0);
    kernels::omp::mark_equal(r.samples, *missing_constant, out.missing);
  }
  out.samples.resize(r.samples.size());
  kernels::omp::affine(r.samples, scaling_factor, value_offset, out.samples);
  return out;
}

RasterStats stats(const ImageRaster& r) {
  RasterStats s;
  s.summary_ = kernels::omp::summarize(r.samples, r.missing);
  if (s.summary_.count == 0) fail(ErrorCode::AllMissing, "raster has no valid samples");
  s.histogram_.reset(s.summary_.min, s.summary_.max);
  kernels::omp::histogram(r.samples, r.missing, s.histogram_);
  s.cumulative_.resize(kernels::kHistogramBins);
  std::uint64_t running = 0;
  for (std::size_t b = 0; b < kernels::kHistogramBins; ++b) {
    running += s.histogram_.counts[b];
    s.cumulative_[b] = running;
  }
  return s;
}

double RasterStats::bin_width() const {
  return (summary_.max - summary_.min) / static_cast<double>(kernels::kHistogramBins);
}

double RasterStats::order_statistic(std::uint64_t rank) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), rank);
  const std::size_t b = static_cast<std::size_t>(it - cumulative_.begin());
  const std::uint64_t count = histogram_.counts[b];
  const std::uint64_t before = cumulative_[b] - count;
  const double lo = histogram_.bin_min[b];
  const double hi = histogram_.bin_max[b];
  if (count == 1 || lo == hi) return lo;
  const std::uint64_t within = rank - before;
  return lo + (hi - lo) * static_cast<double>(within) / static_cast<double>(count - 1);
}

double RasterStats::percentile(double p) const {
  if (!(p >= 0.0 && p <= 100.0)) fail(ErrorCode::InvalidArgument, "percentile must be in [0, 100]");
  const double pos = p / 100.0 * static_cast<double>(summary_.count - 1);
  const auto k = static_cast<std::uint64_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(k);
  const double lo = order_statistic(k);
  if (frac == 0.0 || k + 1 >= summary_.count) return lo;
  return lo + frac * (order_statistic(k + 1) - lo);
}

}  // namespace lunarkit
