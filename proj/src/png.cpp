#include "lunarkit/png.hpp"

#include <zlib.h>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "lunarkit/error.hpp"

namespace lunarkit {

namespace {

constexpr std::array<std::uint8_t, 8> kSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

// Fixed deflate parameters; changing any of them changes every exported file.
constexpr int kDeflateLevel = 6;
constexpr int kDeflateWindowBits = 15;
constexpr int kDeflateMemLevel = 8;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::vector<std::uint8_t>& out, const char (&type)[5], std::span<const std::uint8_t> data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t type_at = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc = crc32(crc32(0L, Z_NULL, 0), out.data() + type_at, static_cast<uInt>(4 + data.size()));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

std::uint8_t paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a);
  const int pb = std::abs(p - b);
  const int pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
  if (pb <= pc) return static_cast<std::uint8_t>(b);
  return static_cast<std::uint8_t>(c);
}

// Applies filter `type` to `row` given the unfiltered previous row.
void filter_row(int type, std::span<const std::uint8_t> row, std::span<const std::uint8_t> prev, std::size_t bpp,
                std::span<std::uint8_t> out) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    const int a = i >= bpp ? row[i - bpp] : 0;
    const int b = prev[i];
    const int c = i >= bpp ? prev[i - bpp] : 0;
    int pred = 0;
    switch (type) {
      case 1: pred = a; break;
      case 2: pred = b; break;
      case 3: pred = (a + b) / 2; break;
      case 4: pred = paeth(a, b, c); break;
      default: break;
    }
    out[i] = static_cast<std::uint8_t>(row[i] - pred);
  }
}

// Filter chosen per row by the minimum sum of absolute signed residuals.
std::vector<std::uint8_t> filtered_scanlines(const QuantizedImage& img) {
  const std::size_t bytes_per_sample = img.depth == 16 ? 2 : 1;
  const std::size_t bpp = img.bands * bytes_per_sample;
  const std::size_t row_bytes = img.width * bpp;
  const std::size_t plane = img.width * img.height;

  std::vector<std::uint8_t> out;
  out.reserve((row_bytes + 1) * img.height);
  std::vector<std::uint8_t> prev(row_bytes, 0), row(row_bytes), trial(row_bytes), best(row_bytes);

  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      for (std::size_t b = 0; b < img.bands; ++b) {
        const std::uint16_t v = img.samples[b * plane + y * img.width + x];
        const std::size_t at = (x * img.bands + b) * bytes_per_sample;
        if (bytes_per_sample == 2) {
          row[at] = static_cast<std::uint8_t>(v >> 8);
          row[at + 1] = static_cast<std::uint8_t>(v & 0xFF);
        } else {
          row[at] = static_cast<std::uint8_t>(v);
        }
      }
    }
    int best_type = 0;
    std::uint64_t best_cost = ~std::uint64_t{0};
    for (int type = 0; type < 5; ++type) {
      filter_row(type, row, prev, bpp, trial);
      std::uint64_t cost = 0;
      for (std::uint8_t v : trial) cost += static_cast<std::uint64_t>(std::abs(static_cast<int>(static_cast<std::int8_t>(v))));
      if (cost < best_cost) {
        best_cost = cost;
        best_type = type;
        best.swap(trial);
      }
    }
    out.push_back(static_cast<std::uint8_t>(best_type));
    out.insert(out.end(), best.begin(), best.end());
    prev.swap(row);
  }
  return out;
}

std::vector<std::uint8_t> deflate_bytes(std::span<const std::uint8_t> raw) {
  z_stream zs{};
  if (deflateInit2(&zs, kDeflateLevel, Z_DEFLATED, kDeflateWindowBits, kDeflateMemLevel, Z_DEFAULT_STRATEGY) != Z_OK) {
    fail(ErrorCode::IoError, "deflateInit2 failed");
  }
  std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(raw.size())));
  zs.next_in = const_cast<Bytef*>(raw.data());
  zs.avail_in = static_cast<uInt>(raw.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  const std::size_t produced = zs.total_out;
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) fail(ErrorCode::IoError, "deflate did not finish");
  out.resize(produced);
  return out;
}

}  // namespace

std::string StretchSpec::describe() const {
  auto fmt = [](double v) {
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
  };
  switch (method) {
    case StretchMethod::none: return "none";
    case StretchMethod::minmax: return "minmax";
    case StretchMethod::percentile: return "p" + fmt(p_lo) + "," + fmt(p_hi);
  }
  return "none";
}

StretchSpec parse_stretch(std::string_view text, int depth) {
  if (depth != 8 && depth != 16) fail(ErrorCode::InvalidArgument, "depth must be 8 or 16");
  if (text == "minmax") return StretchSpec::minmax(depth);
  if (text == "none") return StretchSpec::none(depth);
  if (text.size() > 1 && text.front() == 'p') {
    const std::string_view body = text.substr(1);
    const auto comma = body.find(',');
    if (comma != std::string_view::npos) {
      double lo = 0.0, hi = 0.0;
      const auto r1 = std::from_chars(body.data(), body.data() + comma, lo);
      const auto r2 = std::from_chars(body.data() + comma + 1, body.data() + body.size(), hi);
      if (r1.ec == std::errc() && r1.ptr == body.data() + comma && r2.ec == std::errc() &&
          r2.ptr == body.data() + body.size()) {
        if (!(lo >= 0.0 && lo < hi && hi <= 100.0)) {
          fail(ErrorCode::InvalidArgument, "percentiles need 0 <= lo < hi <= 100");
        }
        return StretchSpec::percentile(lo, hi, depth);
      }
    }
  }
  fail(ErrorCode::InvalidArgument, "stretch must be minmax, none, or pLO,HI; got '" + std::string(text) + "'");
}

QuantizedImage stretch(const ImageRaster& r, const StretchSpec& spec) {
  if (spec.depth != 8 && spec.depth != 16) fail(ErrorCode::InvalidArgument, "depth must be 8 or 16");
  if (spec.method == StretchMethod::percentile && !(spec.p_lo >= 0.0 && spec.p_lo < spec.p_hi && spec.p_hi <= 100.0)) {
    fail(ErrorCode::InvalidArgument, "percentiles need 0 <= lo < hi <= 100");
  }
  const RasterStats st = stats(r);
  const std::uint32_t max_value = spec.max_value();

  QuantizedImage q;
  q.width = r.width;
  q.height = r.height;
  q.bands = r.bands;
  q.depth = spec.depth;
  switch (spec.method) {
    case StretchMethod::none:
      if (st.min() < 0.0 || st.max() > static_cast<double>(max_value)) {
        fail(ErrorCode::RangeError, "values span [" + std::to_string(st.min()) + ", " + std::to_string(st.max()) +
                                        "], outside 0.." + std::to_string(max_value));
      }
      q.lo = 0.0;
      q.hi = static_cast<double>(max_value);
      break;
    case StretchMethod::minmax:
      q.lo = st.min();
      q.hi = st.max();
      break;
    case StretchMethod::percentile:
      q.lo = st.percentile(spec.p_lo);
      q.hi = st.percentile(spec.p_hi);
      break;
  }
  q.samples.resize(r.samples.size());
  kernels::omp::quantize(r.samples, r.missing, q.lo, q.hi, max_value, q.samples);
  return q;
}

std::vector<std::uint8_t> encode_png(const QuantizedImage& img, std::string_view source_id) {
  if (img.bands != 1 && img.bands != 3) {
    fail(ErrorCode::UnsupportedBands, std::to_string(img.bands) + " bands; PNG export supports 1 or 3");
  }
  if (img.depth != 8 && img.depth != 16) fail(ErrorCode::InvalidArgument, "depth must be 8 or 16");
  if (img.width == 0 || img.height == 0 || img.width > 0x7FFFFFFF || img.height > 0x7FFFFFFF) {
    fail(ErrorCode::InvalidArgument, "image dimensions out of PNG range");
  }
  if (img.samples.size() != img.width * img.height * img.bands) {
    fail(ErrorCode::InvalidArgument, "sample count does not match dimensions");
  }

  std::vector<std::uint8_t> out(kSignature.begin(), kSignature.end());

  std::vector<std::uint8_t> ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(img.width));
  put_u32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr.push_back(static_cast<std::uint8_t>(img.depth));
  ihdr.push_back(img.bands == 3 ? 2 : 0);  // color type
  ihdr.push_back(0);                       // deflate
  ihdr.push_back(0);                       // adaptive filtering
  ihdr.push_back(0);                       // no interlace
  put_chunk(out, "IHDR", ihdr);

  if (!source_id.empty()) {
    std::vector<std::uint8_t> text{'S', 'o', 'u', 'r', 'c', 'e', 0};
    text.insert(text.end(), source_id.begin(), source_id.end());
    put_chunk(out, "tEXt", text);
  }

  put_chunk(out, "IDAT", deflate_bytes(filtered_scanlines(img)));
  put_chunk(out, "IEND", {});
  return out;
}

std::size_t write_png(const QuantizedImage& img, std::ostream& out, std::string_view source_id) {
  const std::vector<std::uint8_t> bytes = encode_png(img, source_id);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::IoError, "write failed");
  return bytes.size();
}

std::size_t write_png(const QuantizedImage& img, const std::filesystem::path& path, std::string_view source_id) {
  const std::vector<std::uint8_t> bytes = encode_png(img, source_id);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  f.close();
  if (!f) fail(ErrorCode::IoError, "write to " + path.string() + " failed");
  return bytes.size();
}

std::size_t PngInfo::channels() const {
  switch (color_type) {
    case 0: return 1;
    case 2: return 3;
    case 3: return 1;
    case 4: return 2;
    case 6: return 4;
    default: return 0;
  }
}

PngInfo read_png_info(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::array<std::uint8_t, 33> head{};
  f.read(reinterpret_cast<char*>(head.data()), head.size());
  if (f.gcount() != static_cast<std::streamsize>(head.size()) ||
      !std::equal(kSignature.begin(), kSignature.end(), head.begin()) ||
      std::string_view(reinterpret_cast<const char*>(head.data() + 12), 4) != "IHDR") {
    fail(ErrorCode::InvalidArgument, path.string() + " is not a PNG file");
  }
  auto u32 = [&](std::size_t at) {
    return (std::uint32_t{head[at]} << 24) | (std::uint32_t{head[at + 1]} << 16) | (std::uint32_t{head[at + 2]} << 8) |
           std::uint32_t{head[at + 3]};
  };
  PngInfo info;
  info.width = u32(16);
  info.height = u32(20);
  info.bit_depth = head[24];
  info.color_type = head[25];
  return info;
}

}  // namespace lunarkit
