#pragma once

// Archive scanning, product conversion and the unpaired-domain manifests.
//
// Manifest v1 is JSON Lines, one object per line, LF endings, keys in this
// order:
//
//   v, product_id, label_path, data_path, png_path, width, height, bands,
//   element_type, camera, acquisition_time, domain
//
// "v" is 1; optional fields are null when absent; domain is "A", "B" or
// "unassigned". Paths use forward slashes: label_path and data_path relative
// to the archive root, png_path relative to the output directory.
//
// Skip reports use the same conventions with keys v, label_path, data_path,
// reason.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lunarkit/png.hpp"

namespace lunarkit {

enum class Domain { A, B, unassigned };
std::string_view domain_name(Domain d) noexcept;

struct ManifestEntry {
  std::string product_id;
  std::string label_path;
  std::string data_path;
  std::optional<std::string> png_path;
  std::uint64_t width = 0;
  std::uint64_t height = 0;
  std::uint64_t bands = 0;
  std::string element_type;
  std::optional<std::string> camera;
  std::optional<std::string> acquisition_time;
  Domain domain = Domain::unassigned;

  bool operator==(const ManifestEntry&) const = default;
};

struct ProductPair {
  std::string label_path;
  std::string data_path;
  bool operator==(const ProductPair&) const = default;
};

struct SkipRecord {
  std::string label_path;
  std::string data_path;  // empty when the payload could not be determined
  std::string reason;
  bool operator==(const SkipRecord&) const = default;
};

struct ScanResult {
  std::vector<ProductPair> pairs;  // sorted by label_path
  std::vector<SkipRecord> orphans;
};

// Every *.xml / *.lbl under root (case-insensitive). Labels that do not parse
// or whose payload is missing become orphans. Throws Error{IoError}.
ScanResult scan_archive(const std::filesystem::path& root);

struct BuildOptions {
  bool convert = false;
  std::filesystem::path out_dir;  // required when convert is set
  StretchSpec stretch = StretchSpec::percentile(0.5, 99.5, 8);
  int jobs = 1;
};

struct BuildResult {
  std::vector<ManifestEntry> entries;  // scan order
  std::vector<SkipRecord> skipped;
};

// One entry per product, in pair order regardless of jobs. Per-product
// failures (decode errors, duplicate product_id, export errors) become skip
// records. Throws Error{IoError} only when out_dir cannot be created.
BuildResult build_entries(const std::filesystem::path& root, const std::vector<ProductPair>& pairs,
                          const BuildOptions& options);

// Entries for a directory of plain PNG images (no labels): paths are the
// PNG's own relative path, product_id drops the extension.
std::vector<ManifestEntry> entries_from_png_dir(const std::filesystem::path& root);

// xoshiro256** 1.0 (Blackman & Vigna), state seeded by four successive
// outputs of splitmix64 starting from the 64-bit seed:
//
//   splitmix64: x += 0x9E3779B97F4A7C15;
//               z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9;
//               z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//               return z ^ (z >> 31);
//   next():     result = rotl(s1 * 5, 7) * 9; t = s1 << 17;
//               s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t;
//               s3 = rotl(s3, 45);
//
// bounded(n) = high 64 bits of next() * n (multiply-shift, no rejection).
class Xoshiro256ss {
 public:
  explicit Xoshiro256ss(std::uint64_t seed);
  Xoshiro256ss(std::uint64_t s0, std::uint64_t s1, std::uint64_t s2, std::uint64_t s3);

  std::uint64_t next();
  std::uint64_t bounded(std::uint64_t n);

  static std::uint64_t splitmix64(std::uint64_t& state);

 private:
  std::uint64_t s_[4];
};

struct ByPredicate {
  std::string field;    // any ManifestEntry field name
  std::string pattern;  // fnmatch(3) glob; matching entries go to A
};
struct ByRatio {
  double fraction_a = 0.5;  // 0 < fraction_a < 1
};

struct SplitSpec {
  std::uint64_t seed = 0;
  std::variant<ByPredicate, ByRatio> mode = ByRatio{};
};

// Both modes start from entries sorted by product_id. by_ratio then runs
// Fisher-Yates (i from n-1 down to 1, j = bounded(i+1)) with Xoshiro256ss
// and puts the first ceil(n * fraction_a) in A. Returned lists are sorted by
// product_id with domain set. Throws Error{EmptyDomain, InvalidArgument}.
std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>> split_unpaired(std::vector<ManifestEntry> entries,
                                                                                 const SplitSpec& spec);

nlohmann::ordered_json to_json(const ManifestEntry& e);
// Throws Error{SchemaError}.
ManifestEntry entry_from_json(const nlohmann::json& j);

std::string manifest_text(const std::vector<ManifestEntry>& entries);
// Throws Error{SchemaError} with the 1-based line number.
std::vector<ManifestEntry> parse_manifest(std::string_view text);

// Throws Error{IoError}.
void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path);
// Throws Error{IoError, SchemaError}.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

void write_skip_report(const std::vector<SkipRecord>& records, const std::filesystem::path& path);

}  // namespace lunarkit
