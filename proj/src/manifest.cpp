#include "lunarkit/manifest.hpp"

#include <fnmatch.h>
#include <omp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "lunarkit/error.hpp"
#include "lunarkit/product.hpp"
#include "lunarkit/raster.hpp"

namespace lunarkit {

namespace fs = std::filesystem;

namespace {

__extension__ using u128 = unsigned __int128;

constexpr int kManifestVersion = 1;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string rel(const fs::path& p, const fs::path& root) { return p.lexically_relative(root).generic_string(); }

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::optional<std::string> field_value(const ManifestEntry& e, const std::string& field) {
  if (field == "product_id") return e.product_id;
  if (field == "label_path") return e.label_path;
  if (field == "data_path") return e.data_path;
  if (field == "png_path") return e.png_path;
  if (field == "width") return std::to_string(e.width);
  if (field == "height") return std::to_string(e.height);
  if (field == "bands") return std::to_string(e.bands);
  if (field == "element_type") return e.element_type;
  if (field == "camera") return e.camera;
  if (field == "acquisition_time") return e.acquisition_time;
  if (field == "domain") return std::string(domain_name(e.domain));
  fail(ErrorCode::InvalidArgument, "unknown manifest field '" + field + "'");
}

void write_lines(const std::string& text, const fs::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  f << text;
  f.close();
  if (!f) fail(ErrorCode::IoError, "write to " + path.string() + " failed");
}

const std::vector<std::string>& manifest_keys() {
  static const std::vector<std::string> keys = {"v",     "product_id", "label_path",   "data_path",
                                                "png_path", "width",   "height",       "bands",
                                                "element_type", "camera", "acquisition_time", "domain"};
  return keys;
}

}  // namespace

std::string_view domain_name(Domain d) noexcept {
  switch (d) {
    case Domain::A: return "A";
    case Domain::B: return "B";
    case Domain::unassigned: return "unassigned";
  }
  return "unassigned";
}

ScanResult scan_archive(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) fail(ErrorCode::IoError, root.string() + " is not a readable directory");

  std::vector<fs::path> labels;
  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
  if (ec) fail(ErrorCode::IoError, "cannot read " + root.string() + ": " + ec.message());
  for (const fs::recursive_directory_iterator end; it != end; it.increment(ec)) {
    if (ec) fail(ErrorCode::IoError, "cannot read " + root.string() + ": " + ec.message());
    if (!it->is_regular_file(ec)) continue;
    const std::string ext = lower(it->path().extension().string());
    if (ext == ".xml" || ext == ".lbl") labels.push_back(it->path());
  }
  std::sort(labels.begin(), labels.end(), [&](const fs::path& a, const fs::path& b) { return rel(a, root) < rel(b, root); });

  ScanResult out;
  for (const auto& label : labels) {
    const std::string label_rel = rel(label, root);
    try {
      const ResolvedProduct p = resolve_product(label);
      const std::string data_rel = rel(p.data_file, root);
      if (!fs::is_regular_file(p.data_file, ec)) {
        out.orphans.push_back({label_rel, data_rel, "payload not found: " + data_rel});
        continue;
      }
      out.pairs.push_back({label_rel, data_rel});
    } catch (const Error& e) {
      out.orphans.push_back({label_rel, "", e.what()});
    }
  }
  return out;
}

BuildResult build_entries(const fs::path& root, const std::vector<ProductPair>& pairs, const BuildOptions& options) {
  if (options.convert) {
    std::error_code ec;
    fs::create_directories(options.out_dir, ec);
    if (ec || !fs::is_directory(options.out_dir)) {
      fail(ErrorCode::IoError, "cannot create output directory " + options.out_dir.string());
    }
  }

  const std::size_t n = pairs.size();
  std::vector<std::optional<ManifestEntry>> entries(n);
  std::vector<std::optional<SkipRecord>> skips(n);
  const int jobs = std::max(1, options.jobs);

  std::vector<std::string> png_rel(n);
  std::unordered_set<std::string> png_seen;
  for (std::size_t i = 0; i < n; ++i) {
    png_rel[i] = fs::path(pairs[i].label_path).replace_extension(".png").generic_string();
    if (options.convert && !png_seen.insert(lower(png_rel[i])).second) {
      skips[i] = SkipRecord{pairs[i].label_path, pairs[i].data_path, "output path collides: " + png_rel[i]};
    }
  }

#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (std::size_t i = 0; i < n; ++i) {
    if (skips[i]) continue;
    const ProductPair& pair = pairs[i];
    try {
      const ResolvedProduct p = resolve_product(root / pair.label_path);
      const std::vector<std::uint8_t> bytes = read_file_bytes(p.data_file);
      const ArrayDescriptor& d = p.descriptor;

      ManifestEntry e;
      e.product_id = p.product_id;
      e.label_path = pair.label_path;
      e.data_path = rel(p.data_file, root);
      e.element_type = std::string(element_name(d.element));
      e.camera = p.camera;
      e.acquisition_time = p.acquisition_time;

      const ImageRaster raw = decode(d, bytes);
      e.width = raw.width;
      e.height = raw.height;
      e.bands = raw.bands;

      if (options.convert) {
        const ImageRaster physical = apply_scaling(raw, d.scaling_factor, d.value_offset, d.missing_constant);
        const QuantizedImage q = stretch(physical, options.stretch);
        const fs::path png_file = options.out_dir / png_rel[i];
        fs::create_directories(png_file.parent_path());
        write_png(q, png_file, p.product_id);
        e.png_path = png_rel[i];
      }
      entries[i] = std::move(e);
    } catch (const std::exception& ex) {
      skips[i] = SkipRecord{pair.label_path, pair.data_path, ex.what()};
    }
  }

  BuildResult out;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    if (skips[i]) {
      out.skipped.push_back(std::move(*skips[i]));
      continue;
    }
    if (!seen.insert(entries[i]->product_id).second) {
      out.skipped.push_back({pairs[i].label_path, pairs[i].data_path, "duplicate product_id " + entries[i]->product_id});
      continue;
    }
    out.entries.push_back(std::move(*entries[i]));
  }
  return out;
}

std::vector<ManifestEntry> entries_from_png_dir(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) fail(ErrorCode::IoError, root.string() + " is not a readable directory");
  std::vector<std::string> files;
  for (auto it = fs::recursive_directory_iterator(root, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (it->is_regular_file() && lower(it->path().extension().string()) == ".png") files.push_back(rel(it->path(), root));
  }
  if (ec) fail(ErrorCode::IoError, "cannot read " + root.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());

  std::vector<ManifestEntry> out;
  for (const auto& f : files) {
    const PngInfo info = read_png_info(root / f);
    ManifestEntry e;
    e.product_id = fs::path(f).replace_extension().generic_string();
    e.label_path = f;
    e.data_path = f;
    e.png_path = f;
    e.width = info.width;
    e.height = info.height;
    e.bands = info.channels();
    e.element_type = info.bit_depth == 16 ? "uint16_be" : "uint8";
    out.push_back(std::move(e));
  }
  return out;
}

Xoshiro256ss::Xoshiro256ss(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& s : s_) s = splitmix64(state);
}

Xoshiro256ss::Xoshiro256ss(std::uint64_t s0, std::uint64_t s1, std::uint64_t s2, std::uint64_t s3)
    : s_{s0, s1, s2, s3} {}

std::uint64_t Xoshiro256ss::splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t Xoshiro256ss::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::uint64_t Xoshiro256ss::bounded(std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<u128>(next()) * n) >> 64);
}

std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>> split_unpaired(std::vector<ManifestEntry> entries,
                                                                                 const SplitSpec& spec) {
  if (entries.empty()) fail(ErrorCode::EmptyDomain, "no entries to split");
  std::stable_sort(entries.begin(), entries.end(),
                   [](const ManifestEntry& a, const ManifestEntry& b) { return a.product_id < b.product_id; });

  std::vector<ManifestEntry> a, b;
  if (const auto* pred = std::get_if<ByPredicate>(&spec.mode)) {
    for (auto& e : entries) {
      const auto value = field_value(e, pred->field);
      const bool hit = value && fnmatch(pred->pattern.c_str(), value->c_str(), 0) == 0;
      (hit ? a : b).push_back(std::move(e));
    }
  } else {
    const double fraction = std::get<ByRatio>(spec.mode).fraction_a;
    if (!(fraction > 0.0 && fraction < 1.0)) fail(ErrorCode::InvalidArgument, "fraction_a must be in (0, 1)");
    Xoshiro256ss rng(spec.seed);
    for (std::size_t i = entries.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.bounded(i + 1));
      std::swap(entries[i], entries[j]);
    }
    const auto take = static_cast<std::size_t>(std::ceil(static_cast<double>(entries.size()) * fraction));
    for (std::size_t i = 0; i < entries.size(); ++i) (i < take ? a : b).push_back(std::move(entries[i]));
  }

  if (a.empty() || b.empty()) {
    fail(ErrorCode::EmptyDomain, "split leaves domain " + std::string(a.empty() ? "A" : "B") + " empty");
  }
  const auto by_id = [](const ManifestEntry& x, const ManifestEntry& y) { return x.product_id < y.product_id; };
  std::sort(a.begin(), a.end(), by_id);
  std::sort(b.begin(), b.end(), by_id);
  for (auto& e : a) e.domain = Domain::A;
  for (auto& e : b) e.domain = Domain::B;
  return {std::move(a), std::move(b)};
}

nlohmann::ordered_json to_json(const ManifestEntry& e) {
  using json = nlohmann::ordered_json;
  auto opt = [](const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); };
  json j;
  j["v"] = kManifestVersion;
  j["product_id"] = e.product_id;
  j["label_path"] = e.label_path;
  j["data_path"] = e.data_path;
  j["png_path"] = opt(e.png_path);
  j["width"] = e.width;
  j["height"] = e.height;
  j["bands"] = e.bands;
  j["element_type"] = e.element_type;
  j["camera"] = opt(e.camera);
  j["acquisition_time"] = opt(e.acquisition_time);
  j["domain"] = domain_name(e.domain);
  return j;
}

ManifestEntry entry_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorCode::SchemaError, "manifest line is not an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(manifest_keys().begin(), manifest_keys().end(), key) == manifest_keys().end()) {
      fail(ErrorCode::SchemaError, "unknown key '" + key + "'");
    }
  }
  for (const auto& key : manifest_keys()) {
    if (!j.contains(key)) fail(ErrorCode::SchemaError, "missing key '" + key + "'");
  }
  if (!j["v"].is_number_integer() || j["v"].get<std::int64_t>() != kManifestVersion) {
    fail(ErrorCode::SchemaError, "unsupported manifest version " + j["v"].dump());
  }
  auto str = [&](const char* key) {
    if (!j[key].is_string()) fail(ErrorCode::SchemaError, std::string(key) + " must be a string");
    return j[key].get<std::string>();
  };
  auto opt = [&](const char* key) -> std::optional<std::string> {
    if (j[key].is_null()) return std::nullopt;
    return str(key);
  };
  auto count = [&](const char* key) {
    if (!j[key].is_number_unsigned()) fail(ErrorCode::SchemaError, std::string(key) + " must be a non-negative integer");
    return j[key].get<std::uint64_t>();
  };

  ManifestEntry e;
  e.product_id = str("product_id");
  e.label_path = str("label_path");
  e.data_path = str("data_path");
  e.png_path = opt("png_path");
  e.width = count("width");
  e.height = count("height");
  e.bands = count("bands");
  e.element_type = str("element_type");
  e.camera = opt("camera");
  e.acquisition_time = opt("acquisition_time");
  const std::string domain = str("domain");
  if (domain == "A") e.domain = Domain::A;
  else if (domain == "B") e.domain = Domain::B;
  else if (domain == "unassigned") e.domain = Domain::unassigned;
  else fail(ErrorCode::SchemaError, "domain must be A, B or unassigned");
  return e;
}

std::string manifest_text(const std::vector<ManifestEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += to_json(e).dump();
    out += '\n';
  }
  return out;
}

std::vector<ManifestEntry> parse_manifest(std::string_view text) {
  std::vector<ManifestEntry> out;
  std::unordered_set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      ManifestEntry e = entry_from_json(j);
      if (!ids.insert(e.product_id).second) fail(ErrorCode::SchemaError, "duplicate product_id " + e.product_id);
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorCode::SchemaError, "line " + std::to_string(line_no) + ": " + ex.what());
    } catch (const Error& ex) {
      fail(ErrorCode::SchemaError, "line " + std::to_string(line_no) + ": " + ex.detail());
    }
  }
  return out;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const fs::path& path) {
  write_lines(manifest_text(entries), path);
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) { return parse_manifest(read_file_text(path)); }

void write_skip_report(const std::vector<SkipRecord>& records, const fs::path& path) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["v"] = kManifestVersion;
    j["label_path"] = r.label_path;
    j["data_path"] = r.data_path;
    j["reason"] = r.reason;
    out += j.dump();
    out += '\n';
  }
  write_lines(out, path);
}

}  // namespace lunarkit
