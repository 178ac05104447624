#pragma once

// Test-only helpers: temporary directories, fixture label builders, and the
// independent encoder the decode oracle uses to lay out payload bytes.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "lunarkit/odl.hpp"
#include "lunarkit/pds4.hpp"

namespace lunarkit::testing {

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, std::string_view text);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> file_bytes(const std::filesystem::path& path);

// Appends one element in the given type's width and byte order. Built with
// memcpy plus an explicit byte reversal, independent of the decoder's
// shift-based loads.
void encode_element(double value, ElementType type, std::vector<std::uint8_t>& out);

// Lays out a band-sequential logical cube in the storage order named by the
// descriptor's axes: nested loops over axes[0] (outermost) .. axes[n-1],
// mapping each axis to band/line/sample by its name.
std::vector<std::uint8_t> layout_payload(const std::vector<double>& band_sequential, const ArrayDescriptor& d);

// Random values exactly representable in the element type.
std::vector<double> random_values(std::size_t n, ElementType type, std::mt19937_64& rng);

struct Pds4Fixture {
  std::string lid = "urn:cnsa:ce4:gras:pcam:test";
  std::string file_name = "TEST.IMG";
  std::string product_class = "Product_Observational";
  std::string prefix;  // namespace prefix, e.g. "pds:"
  std::uint64_t lines = 1;
  std::uint64_t samples = 1;
  std::uint64_t bands = 0;  // 0: Array_2D_Image
  Interleave interleave = Interleave::band_sequential;
  std::string data_type = "UnsignedByte";
  std::uint64_t offset = 0;
  std::optional<std::string> instrument;
  std::optional<std::string> start_time;
  std::optional<double> scaling_factor;
  std::optional<double> value_offset;
  std::optional<double> missing_constant;
  bool reverse_axis_order = false;  // list Axis_Array children in reverse
};

std::string pds4_label(const Pds4Fixture& f);

struct Pds3Fixture {
  std::string product_id = "CE3_TEST";
  std::uint64_t lines = 1;
  std::uint64_t samples = 1;
  std::optional<std::uint64_t> bands;
  std::string band_storage = "BAND_SEQUENTIAL";
  int sample_bits = 8;
  std::string sample_type = "UNSIGNED_INTEGER";
  std::string pointer = "\"TEST.IMG\"";  // right-hand side of ^IMAGE
  std::optional<std::uint64_t> record_bytes;
  std::optional<std::string> instrument_id;
  std::optional<std::string> start_time;
};

std::string pds3_label(const Pds3Fixture& f);

// Writes a PDS4 product (label + payload of random values) and returns the
// payload bytes.
std::vector<std::uint8_t> write_pds4_product(const std::filesystem::path& label_path, const Pds4Fixture& f,
                                             std::uint64_t seed);

// Mixed archive: two PDS4 products (one PCAM 3-band, one TCAM 16-bit), one
// detached PDS3 product and one attached PDS3 product.
void make_fixture_archive(const std::filesystem::path& root);
inline constexpr std::size_t kFixtureArchiveProducts = 4;

// Every fixture label of the archive, relative to root, sorted.
std::vector<std::string> fixture_archive_labels();

// Random label over the accepted grammar subset.
odl::OdlLabel random_label(std::mt19937_64& rng, int max_depth = 2);

// Hand-written Chang'E-style ODL labels under tests/fixtures/odl.
std::vector<std::filesystem::path> odl_fixture_files();

std::filesystem::path fixture_dir();

}  // namespace lunarkit::testing
