// Serial reference vs OpenMP kernels on a 2048 x 2048 single-band frame.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "lunarkit/kernels.hpp"

using namespace lunarkit;
using namespace lunarkit::kernels;

namespace {

constexpr std::size_t kSide = 2048;

const std::vector<std::uint8_t>& payload() {
  static const std::vector<std::uint8_t> bytes = [] {
    std::vector<std::uint8_t> b(kSide * kSide * 2);
    std::mt19937_64 rng(7);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    return b;
  }();
  return bytes;
}

CubeLayout layout() {
  CubeLayout l;
  l.lines = kSide;
  l.samples = kSide;
  l.element = ElementType::int16_be;
  return l;
}

const std::vector<double>& frame() {
  static const std::vector<double> v = [] {
    std::vector<double> out(kSide * kSide);
    serial::decode(payload(), layout(), out);
    return out;
  }();
  return v;
}

const std::vector<double>& other_frame() {
  static const std::vector<double> v = [] {
    std::vector<double> out(frame());
    for (auto& x : out) x = -x * 0.5 + 3.0;
    return out;
  }();
  return v;
}

template <void (*Decode)(std::span<const std::uint8_t>, const CubeLayout&, std::span<double>)>
void BM_decode(benchmark::State& state) {
  std::vector<double> out(kSide * kSide);
  for (auto _ : state) {
    Decode(payload(), layout(), out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * payload().size()));
}

template <Summary (*Summarize)(std::span<const double>, std::span<const std::uint8_t>)>
void BM_summarize(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(Summarize(frame(), {}));
}

template <void (*Hist)(std::span<const double>, std::span<const std::uint8_t>, Histogram&)>
void BM_histogram(benchmark::State& state) {
  Histogram h;
  for (auto _ : state) {
    h.reset(-32768.0, 32767.0);
    Hist(frame(), {}, h);
    benchmark::DoNotOptimize(h.counts.data());
  }
}

template <void (*Quantize)(std::span<const double>, std::span<const std::uint8_t>, double, double, std::uint32_t,
                           std::span<std::uint16_t>)>
void BM_quantize(benchmark::State& state) {
  std::vector<std::uint16_t> out(kSide * kSide);
  for (auto _ : state) {
    Quantize(frame(), {}, -20000.0, 20000.0, 255, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <double (*AbsDiff)(std::span<const double>, std::span<const double>)>
void BM_abs_diff_sum(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(AbsDiff(frame(), other_frame()));
}

}  // namespace

BENCHMARK(BM_decode<serial::decode>)->Name("decode/serial")->UseRealTime();
BENCHMARK(BM_decode<omp::decode>)->Name("decode/omp")->UseRealTime();
BENCHMARK(BM_summarize<serial::summarize>)->Name("summarize/serial")->UseRealTime();
BENCHMARK(BM_summarize<omp::summarize>)->Name("summarize/omp")->UseRealTime();
BENCHMARK(BM_histogram<serial::histogram>)->Name("histogram/serial")->UseRealTime();
BENCHMARK(BM_histogram<omp::histogram>)->Name("histogram/omp")->UseRealTime();
BENCHMARK(BM_quantize<serial::quantize>)->Name("quantize/serial")->UseRealTime();
BENCHMARK(BM_quantize<omp::quantize>)->Name("quantize/omp")->UseRealTime();
BENCHMARK(BM_abs_diff_sum<serial::abs_diff_sum>)->Name("abs_diff_sum/serial")->UseRealTime();
BENCHMARK(BM_abs_diff_sum<omp::abs_diff_sum>)->Name("abs_diff_sum/omp")->UseRealTime();

BENCHMARK_MAIN();
