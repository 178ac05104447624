#include <omp.h>

#include <algorithm>
#include <limits>

#include "kernels_common.hpp"
#include "lunarkit/kernels.hpp"

namespace lunarkit::kernels::omp {

namespace {

std::size_t block_count(std::size_t n) { return (n + kReduceBlock - 1) / kReduceBlock; }

}  // namespace

void decode(std::span<const std::uint8_t> payload, const CubeLayout& c, std::span<double> out) {
  const std::size_t width = element_width(c.element);
  const std::size_t rows = c.bands * c.lines;
  const bool par = c.count() >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (std::size_t row = 0; row < rows; ++row) {
    const std::size_t b = row / c.lines;
    const std::size_t l = row % c.lines;
    double* dst = out.data() + row * c.samples;
    for (std::size_t s = 0; s < c.samples; ++s) {
      dst[s] = read_element(payload.data() + detail::source_index(c, b, l, s) * width, c.element);
    }
  }
}

void affine(std::span<const double> in, double factor, double offset, std::span<double> out) {
  const std::size_t n = in.size();
#pragma omp parallel for simd schedule(static) if (n >= kParallelThreshold)
  for (std::size_t i = 0; i < n; ++i) out[i] = in[i] * factor + offset;
}

void mark_equal(std::span<const double> in, double value, std::span<std::uint8_t> mask) {
  const std::size_t n = in.size();
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::size_t i = 0; i < n; ++i) mask[i] |= static_cast<std::uint8_t>(in[i] == value);
}

Summary summarize(std::span<const double> in, std::span<const std::uint8_t> mask) {
  const std::size_t n = in.size();
  const std::size_t blocks = block_count(n);
  std::vector<Summary> partial(blocks);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    Summary s;
    s.min = std::numeric_limits<double>::infinity();
    s.max = -std::numeric_limits<double>::infinity();
    const std::size_t end = std::min(n, (blk + 1) * kReduceBlock);
    for (std::size_t i = blk * kReduceBlock; i < end; ++i) {
      if (!detail::valid(in[i], mask, i)) continue;
      s.min = std::min(s.min, in[i]);
      s.max = std::max(s.max, in[i]);
      s.sum += in[i];
      ++s.count;
    }
    partial[blk] = s;
  }
  Summary total;
  total.min = std::numeric_limits<double>::infinity();
  total.max = -std::numeric_limits<double>::infinity();
  for (const auto& s : partial) {
    total.min = std::min(total.min, s.min);
    total.max = std::max(total.max, s.max);
    total.sum += s.sum;
    total.count += s.count;
  }
  return total;
}

void histogram(std::span<const double> in, std::span<const std::uint8_t> mask, Histogram& h) {
  const std::size_t n = in.size();
  if (n < kParallelThreshold) {
    serial::histogram(in, mask, h);
    return;
  }
#pragma omp parallel
  {
    Histogram local;
    local.reset(h.lo, h.hi);
#pragma omp for schedule(static) nowait
    for (std::size_t i = 0; i < n; ++i) {
      if (!detail::valid(in[i], mask, i)) continue;
      const std::size_t b = local.bin_of(in[i]);
      ++local.counts[b];
      local.bin_min[b] = std::min(local.bin_min[b], in[i]);
      local.bin_max[b] = std::max(local.bin_max[b], in[i]);
    }
    // Counts add and extremes are order-free, so merge order cannot change the result.
#pragma omp critical(lunarkit_histogram_merge)
    for (std::size_t b = 0; b < kHistogramBins; ++b) {
      if (local.counts[b] == 0) continue;
      h.counts[b] += local.counts[b];
      h.bin_min[b] = std::min(h.bin_min[b], local.bin_min[b]);
      h.bin_max[b] = std::max(h.bin_max[b], local.bin_max[b]);
    }
  }
}

void quantize(std::span<const double> in, std::span<const std::uint8_t> mask, double lo, double hi,
              std::uint32_t max_value, std::span<std::uint16_t> out) {
  const std::size_t n = in.size();
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (mask.empty() || mask[i] == 0) ? detail::quantize_one(in[i], lo, hi, max_value) : 0;
  }
}

double abs_diff_sum(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const std::size_t blocks = block_count(n);
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    double s = 0.0;
    const std::size_t end = std::min(n, (blk + 1) * kReduceBlock);
    for (std::size_t i = blk * kReduceBlock; i < end; ++i) s += std::abs(a[i] - b[i]);
    partial[blk] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

}  // namespace lunarkit::kernels::omp
