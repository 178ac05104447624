#include "lunarkit/product.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <regex>

#include "lunarkit/error.hpp"
#include "lunarkit/odl.hpp"

namespace lunarkit {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::optional<LabelFormat> sniff(std::string_view text) {
  std::size_t i = 0;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;
  for (;;) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (text.substr(i, 2) != "/*") break;
    const auto close = text.find("*/", i + 2);
    if (close == std::string_view::npos) return std::nullopt;
    i = close + 2;
  }
  const std::string_view rest = text.substr(i);
  if (rest.starts_with("<")) return LabelFormat::pds4;
  static const std::regex odl_start(R"(^(\^?[A-Za-z][A-Za-z0-9_:]*[ \t]*=|END\b))");
  const std::string head(rest.substr(0, 256));
  if (std::regex_search(head, odl_start)) return LabelFormat::pds3;
  return std::nullopt;
}

fs::path find_case_insensitive(const fs::path& dir, const std::string& name) {
  const fs::path direct = dir / name;
  if (fs::exists(direct)) return direct;
  std::error_code ec;
  const std::string want = lower(name);
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    if (lower(e.path().filename().string()) == want) return e.path();
  }
  return direct;
}

std::optional<std::string> odl_text(const odl::OdlLabel& label, std::string_view key) {
  const auto* st = label.find_statement(key);
  return st ? st->value.as_string() : std::nullopt;
}

}  // namespace

std::string_view format_name(LabelFormat f) noexcept { return f == LabelFormat::pds3 ? "pds3" : "pds4"; }

LabelFormat detect_label_format(const fs::path& path, std::string_view contents) {
  std::optional<LabelFormat> by_ext;
  const std::string ext = lower(path.extension().string());
  if (ext == ".xml") by_ext = LabelFormat::pds4;
  if (ext == ".lbl") by_ext = LabelFormat::pds3;
  const std::optional<LabelFormat> by_content = sniff(contents);

  if (by_ext && by_content && *by_ext != *by_content) {
    fail(ErrorCode::UnknownFormat, path.string() + " is ambiguous: extension says " +
                                       std::string(format_name(*by_ext)) + ", content looks like " +
                                       std::string(format_name(*by_content)));
  }
  if (by_ext) return *by_ext;
  if (by_content) return *by_content;
  fail(ErrorCode::UnknownFormat, path.string() + " is neither a PDS4 XML nor a PDS3 ODL label");
}

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (f.bad()) fail(ErrorCode::IoError, "read of " + path.string() + " failed");
  return bytes;
}

std::string read_file_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (f.bad()) fail(ErrorCode::IoError, "read of " + path.string() + " failed");
  return text;
}

ResolvedProduct resolve_product(const fs::path& label_file) {
  const std::string text = read_file_text(label_file);
  ResolvedProduct out;
  out.label_file = label_file;
  out.format = detect_label_format(label_file, text);
  const fs::path dir = label_file.parent_path();

  if (out.format == LabelFormat::pds4) {
    Pds4Product p = parse_pds4(text);
    if (p.arrays.empty()) fail(ErrorCode::NotFound, label_file.string() + " describes no Array_2D_Image/Array_3D_Image");
    out.product_id = p.logical_identifier.empty() ? label_file.stem().string() : p.logical_identifier;
    out.camera = p.instrument;
    out.acquisition_time = p.start_time;
    out.descriptor = p.arrays.front();
    out.data_file = dir / p.file_name;
    return out;
  }

  const odl::OdlLabel label = odl::parse_odl(text);
  auto [descriptor, pointer] = descriptor_from_odl(label, std::nullopt);
  out.descriptor = std::move(descriptor);
  out.product_id = odl_text(label, "PRODUCT_ID").value_or(label_file.stem().string());
  out.camera = odl_text(label, "INSTRUMENT_ID");
  if (!out.camera) out.camera = odl_text(label, "INSTRUMENT_NAME");
  out.acquisition_time = odl_text(label, "START_TIME");
  out.data_file = pointer.target_file ? find_case_insensitive(dir, *pointer.target_file) : label_file;
  return out;
}

}  // namespace lunarkit
