#pragma once

// Binds a label file (PDS4 XML or PDS3 ODL) to its image payload.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lunarkit/pds4.hpp"

namespace lunarkit {

enum class LabelFormat { pds3, pds4 };
std::string_view format_name(LabelFormat f) noexcept;

// Extension first (.xml -> pds4, .lbl -> pds3, case-insensitive), then a
// content sniff. A file whose extension and content disagree is ambiguous.
// Throws Error{UnknownFormat} naming the candidates.
LabelFormat detect_label_format(const std::filesystem::path& path, std::string_view contents);

struct ResolvedProduct {
  LabelFormat format = LabelFormat::pds4;
  std::string product_id;
  std::optional<std::string> camera;
  std::optional<std::string> acquisition_time;
  ArrayDescriptor descriptor;
  std::filesystem::path label_file;
  std::filesystem::path data_file;  // may not exist; callers check
};

// Parses the label and locates the payload next to it. PDS3 file names are
// matched case-insensitively within the label's directory; attached labels
// point at the label file itself. Throws the parsers' errors and
// Error{NotFound} when a PDS4 product has no image array.
ResolvedProduct resolve_product(const std::filesystem::path& label_file);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);

}  // namespace lunarkit
