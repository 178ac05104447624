#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lunarkit/odl.hpp"

namespace lunarkit {

enum class ElementType {
  uint8,
  int8,
  uint16_be,
  uint16_le,
  int16_be,
  int16_le,
  uint32_be,
  uint32_le,
  int32_be,
  int32_le,
  float32_be,
  float32_le,
  float64_be,
  float64_le,
};

inline constexpr std::array<ElementType, 14> kAllElementTypes = {
    ElementType::uint8,      ElementType::int8,       ElementType::uint16_be,  ElementType::uint16_le,
    ElementType::int16_be,   ElementType::int16_le,   ElementType::uint32_be,  ElementType::uint32_le,
    ElementType::int32_be,   ElementType::int32_le,   ElementType::float32_be, ElementType::float32_le,
    ElementType::float64_be, ElementType::float64_le,
};

std::size_t element_width(ElementType t) noexcept;
bool is_float(ElementType t) noexcept;
bool is_signed(ElementType t) noexcept;
// Multi-byte types only; uint8/int8 report false.
bool is_big_endian(ElementType t) noexcept;

// "uint16_be" etc.
std::string_view element_name(ElementType t) noexcept;
std::optional<ElementType> element_from_name(std::string_view name) noexcept;
// PDS4 data_type names ("UnsignedMSB2" etc.)
std::string_view pds4_type_name(ElementType t) noexcept;
std::optional<ElementType> element_from_pds4(std::string_view data_type) noexcept;

enum class Interleave { band_sequential, line_interleaved, pixel_interleaved };
std::string_view interleave_name(Interleave i) noexcept;

struct AxisSpec {
  std::string name;  // "Line", "Sample", "Band"
  std::uint64_t elements = 1;
  int sequence_number = 1;
  bool operator==(const AxisSpec&) const = default;
};

struct ArrayDescriptor {
  std::vector<AxisSpec> axes;  // storage order, slowest first
  ElementType element = ElementType::uint8;
  std::uint64_t offset_bytes = 0;
  double scaling_factor = 1.0;
  double value_offset = 0.0;
  std::optional<double> missing_constant;
  Interleave interleave = Interleave::band_sequential;

  bool operator==(const ArrayDescriptor&) const = default;

  std::uint64_t lines() const;
  std::uint64_t samples() const;
  std::uint64_t bands() const;
};

// Builds a descriptor with axes named and ordered for the given interleave;
// bands == 0 yields a 2-axis (Line, Sample) array.
ArrayDescriptor make_descriptor(std::uint64_t lines, std::uint64_t samples, std::uint64_t bands,
                                ElementType element, Interleave interleave, std::uint64_t offset_bytes = 0);

// Product of axis element counts times element width. Throws Error{Overflow}.
std::uint64_t expected_payload_bytes(const ArrayDescriptor& d);

struct Pds4Product {
  std::string product_class;
  std::string logical_identifier;
  std::optional<std::string> title;
  std::optional<std::string> start_time;
  std::optional<std::string> instrument;  // Observing_System_Component of type Instrument
  std::string file_name;
  std::vector<ArrayDescriptor> arrays;  // document order; the first is primary
};

// Throws Error{XmlMalformed, MissingFileArea, UnsupportedElementType, BadAxisNumbering}.
Pds4Product parse_pds4(std::string_view xml_text);

// record_bytes defaults to the label's RECORD_BYTES when not supplied.
// Throws Error{NotFound, UnsupportedSampleType, NeedsRecordBytes}.
std::pair<ArrayDescriptor, odl::PointerInfo> descriptor_from_odl(const odl::OdlLabel& label,
                                                                 std::optional<std::uint64_t> record_bytes);

nlohmann::ordered_json to_json(const ArrayDescriptor& d);
nlohmann::ordered_json to_json(const Pds4Product& p);

}  // namespace lunarkit
