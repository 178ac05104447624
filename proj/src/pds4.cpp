#include "lunarkit/pds4.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "lunarkit/error.hpp"
#include "lunarkit/xml_reader.hpp"

namespace lunarkit {

namespace {

struct ElementInfo {
  ElementType type;
  std::string_view name;
  std::string_view pds4;
  std::size_t width;
};

constexpr std::array<ElementInfo, 14> kElementTable = {{
    {ElementType::uint8, "uint8", "UnsignedByte", 1},
    {ElementType::int8, "int8", "SignedByte", 1},
    {ElementType::uint16_be, "uint16_be", "UnsignedMSB2", 2},
    {ElementType::uint16_le, "uint16_le", "UnsignedLSB2", 2},
    {ElementType::int16_be, "int16_be", "SignedMSB2", 2},
    {ElementType::int16_le, "int16_le", "SignedLSB2", 2},
    {ElementType::uint32_be, "uint32_be", "UnsignedMSB4", 4},
    {ElementType::uint32_le, "uint32_le", "UnsignedLSB4", 4},
    {ElementType::int32_be, "int32_be", "SignedMSB4", 4},
    {ElementType::int32_le, "int32_le", "SignedLSB4", 4},
    {ElementType::float32_be, "float32_be", "IEEE754MSBSingle", 4},
    {ElementType::float32_le, "float32_le", "IEEE754LSBSingle", 4},
    {ElementType::float64_be, "float64_be", "IEEE754MSBDouble", 8},
    {ElementType::float64_le, "float64_le", "IEEE754LSBDouble", 8},
}};

const ElementInfo& info(ElementType t) noexcept { return kElementTable[static_cast<std::size_t>(t)]; }

bool contains_band(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return lower.find("band") != std::string::npos;
}

// Indices of (band, line, sample) within the storage-ordered axes. 2-axis
// arrays report band = npos.
struct AxisRoles {
  std::size_t band = std::string::npos;
  std::size_t line = 0;
  std::size_t sample = 1;
};

AxisRoles axis_roles(const std::vector<AxisSpec>& axes) {
  AxisRoles roles;
  if (axes.size() != 3) return roles;
  roles.band = 0;
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (contains_band(axes[i].name)) {
      roles.band = i;
      break;
    }
  }
  std::size_t rest[2];
  std::size_t n = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (i != roles.band) rest[n++] = i;
  }
  roles.line = rest[0];
  roles.sample = rest[1];
  return roles;
}

double parse_real(const std::string& s, const char* what, int line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (b != e && *b == '+') ++b;
  const auto [p, ec] = std::from_chars(b, e, v);
  if (s.empty() || ec != std::errc() || p != e || !std::isfinite(v)) {
    fail(ErrorCode::XmlMalformed, "line " + std::to_string(line) + ": " + what + " is not a number: '" + s + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& s, const char* what, int line) {
  std::int64_t v = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (b != e && *b == '+') ++b;
  const auto [p, ec] = std::from_chars(b, e, v);
  if (s.empty() || ec != std::errc() || p != e) {
    fail(ErrorCode::XmlMalformed, "line " + std::to_string(line) + ": " + what + " is not an integer: '" + s + "'");
  }
  return v;
}

const xml::Element* find_descendant(const xml::Element& e, std::string_view name) {
  for (const auto& c : e.children) {
    if (c.name == name) return &c;
    if (const auto* hit = find_descendant(c, name)) return hit;
  }
  return nullptr;
}

ArrayDescriptor parse_array(const xml::Element& arr, std::size_t expected_axes) {
  ArrayDescriptor d;

  if (const auto* off = arr.child("offset")) {
    const std::int64_t v = parse_int(off->text, "offset", off->line);
    if (v < 0) fail(ErrorCode::XmlMalformed, "line " + std::to_string(off->line) + ": negative offset");
    d.offset_bytes = static_cast<std::uint64_t>(v);
  }

  const auto* elem = arr.child("Element_Array");
  if (!elem || !elem->child_text("data_type")) {
    fail(ErrorCode::XmlMalformed, "line " + std::to_string(arr.line) + ": " + arr.name + " lacks Element_Array/data_type");
  }
  const std::string& dt = *elem->child_text("data_type");
  const auto type = element_from_pds4(dt);
  if (!type) fail(ErrorCode::UnsupportedElementType, "data_type '" + dt + "'");
  d.element = *type;
  if (const auto* sf = elem->child("scaling_factor")) d.scaling_factor = parse_real(sf->text, "scaling_factor", sf->line);
  if (const auto* vo = elem->child("value_offset")) d.value_offset = parse_real(vo->text, "value_offset", vo->line);

  if (const auto* sc = arr.child("Special_Constants")) {
    if (const auto* mc = sc->child("missing_constant")) d.missing_constant = parse_real(mc->text, "missing_constant", mc->line);
  }

  for (const auto* ax : arr.children_named("Axis_Array")) {
    AxisSpec spec;
    const auto* name = ax->child_text("axis_name");
    const auto* elements = ax->child("elements");
    const auto* seq = ax->child("sequence_number");
    if (!name || !elements || !seq) {
      fail(ErrorCode::XmlMalformed, "line " + std::to_string(ax->line) + ": incomplete Axis_Array");
    }
    spec.name = *name;
    const std::int64_t n = parse_int(elements->text, "elements", elements->line);
    if (n < 1) fail(ErrorCode::BadAxisNumbering, "axis " + spec.name + " has " + std::to_string(n) + " elements");
    spec.elements = static_cast<std::uint64_t>(n);
    const std::int64_t s = parse_int(seq->text, "sequence_number", seq->line);
    if (s < 1 || s > 3) fail(ErrorCode::BadAxisNumbering, "axis " + spec.name + " sequence_number " + std::to_string(s));
    spec.sequence_number = static_cast<int>(s);
    d.axes.push_back(std::move(spec));
  }

  if (const auto* axes_count = arr.child("axes")) {
    const std::int64_t declared = parse_int(axes_count->text, "axes", axes_count->line);
    if (declared != static_cast<std::int64_t>(d.axes.size())) {
      fail(ErrorCode::BadAxisNumbering, arr.name + " declares " + std::to_string(declared) + " axes but lists " +
                                            std::to_string(d.axes.size()));
    }
  }
  if (d.axes.size() != expected_axes) {
    fail(ErrorCode::BadAxisNumbering,
         arr.name + " needs " + std::to_string(expected_axes) + " Axis_Array entries, found " + std::to_string(d.axes.size()));
  }
  std::sort(d.axes.begin(), d.axes.end(),
            [](const AxisSpec& a, const AxisSpec& b) { return a.sequence_number < b.sequence_number; });
  for (std::size_t i = 0; i < d.axes.size(); ++i) {
    if (d.axes[i].sequence_number != static_cast<int>(i + 1)) {
      fail(ErrorCode::BadAxisNumbering, arr.name + " sequence numbers are not 1.." + std::to_string(d.axes.size()));
    }
  }

  if (d.axes.size() == 3) {
    const AxisRoles roles = axis_roles(d.axes);
    d.interleave = roles.band == 0   ? Interleave::band_sequential
                   : roles.band == 1 ? Interleave::line_interleaved
                                     : Interleave::pixel_interleaved;
  }
  return d;
}

std::optional<std::string> odl_string(const odl::OdlLabel& body, std::string_view key) {
  const auto* st = body.find_statement(key);
  if (!st) return std::nullopt;
  return st->value.as_string();
}

std::optional<double> odl_number(const odl::OdlLabel& body, std::string_view key) {
  const auto* st = body.find_statement(key);
  if (!st) return std::nullopt;
  return st->value.as_number();
}

std::int64_t odl_required_int(const odl::OdlLabel& body, std::string_view key) {
  const auto* st = body.find_statement(key);
  if (!st) fail(ErrorCode::NotFound, "IMAGE has no " + std::string(key));
  if (!st->value.is_integer()) fail(ErrorCode::MalformedValue, std::string(key) + " must be an integer");
  return std::get<std::int64_t>(st->value.data);
}

const odl::OdlBlock* find_image(const odl::OdlLabel& label) {
  if (const auto* top = label.find_child("IMAGE")) return top;
  for (const auto& child : label.children) {
    if (const auto* nested = find_image(child.body)) return nested;
  }
  return nullptr;
}

std::optional<ElementType> map_sample_type(std::int64_t bits, std::string type) {
  std::transform(type.begin(), type.end(), type.begin(), [](unsigned char c) { return std::toupper(c); });
  const auto one_of = [&](std::initializer_list<std::string_view> names) {
    return std::find(names.begin(), names.end(), type) != names.end();
  };
  const bool u_msb = one_of({"UNSIGNED_INTEGER", "MSB_UNSIGNED_INTEGER", "SUN_UNSIGNED_INTEGER", "MAC_UNSIGNED_INTEGER"});
  const bool u_lsb = one_of({"LSB_UNSIGNED_INTEGER", "PC_UNSIGNED_INTEGER", "VAX_UNSIGNED_INTEGER"});
  const bool s_msb = one_of({"INTEGER", "MSB_INTEGER", "SUN_INTEGER", "MAC_INTEGER"});
  const bool s_lsb = one_of({"LSB_INTEGER", "PC_INTEGER", "VAX_INTEGER"});
  const bool f_msb = one_of({"IEEE_REAL", "REAL", "FLOAT", "SUN_REAL", "MAC_REAL"});
  const bool f_lsb = one_of({"PC_REAL"});
  switch (bits) {
    case 8:
      if (u_msb || u_lsb) return ElementType::uint8;
      if (s_msb || s_lsb) return ElementType::int8;
      break;
    case 16:
      if (u_msb) return ElementType::uint16_be;
      if (u_lsb) return ElementType::uint16_le;
      if (s_msb) return ElementType::int16_be;
      if (s_lsb) return ElementType::int16_le;
      break;
    case 32:
      if (u_msb) return ElementType::uint32_be;
      if (u_lsb) return ElementType::uint32_le;
      if (s_msb) return ElementType::int32_be;
      if (s_lsb) return ElementType::int32_le;
      if (f_msb) return ElementType::float32_be;
      if (f_lsb) return ElementType::float32_le;
      break;
    case 64:
      if (f_msb) return ElementType::float64_be;
      if (f_lsb) return ElementType::float64_le;
      break;
    default:
      break;
  }
  return std::nullopt;
}

}  // namespace

std::size_t element_width(ElementType t) noexcept { return info(t).width; }

bool is_float(ElementType t) noexcept {
  return t == ElementType::float32_be || t == ElementType::float32_le || t == ElementType::float64_be ||
         t == ElementType::float64_le;
}

bool is_signed(ElementType t) noexcept {
  switch (t) {
    case ElementType::int8:
    case ElementType::int16_be:
    case ElementType::int16_le:
    case ElementType::int32_be:
    case ElementType::int32_le:
      return true;
    default:
      return is_float(t);
  }
}

bool is_big_endian(ElementType t) noexcept {
  const std::string_view n = info(t).name;
  return n.ends_with("_be");
}

std::string_view element_name(ElementType t) noexcept { return info(t).name; }
std::string_view pds4_type_name(ElementType t) noexcept { return info(t).pds4; }

std::optional<ElementType> element_from_name(std::string_view name) noexcept {
  for (const auto& e : kElementTable) {
    if (e.name == name) return e.type;
  }
  return std::nullopt;
}

std::optional<ElementType> element_from_pds4(std::string_view data_type) noexcept {
  for (const auto& e : kElementTable) {
    if (e.pds4 == data_type) return e.type;
  }
  return std::nullopt;
}

std::string_view interleave_name(Interleave i) noexcept {
  switch (i) {
    case Interleave::band_sequential: return "band_sequential";
    case Interleave::line_interleaved: return "line_interleaved";
    case Interleave::pixel_interleaved: return "pixel_interleaved";
  }
  return "band_sequential";
}

std::uint64_t ArrayDescriptor::lines() const { return axes.at(axis_roles(axes).line).elements; }
std::uint64_t ArrayDescriptor::samples() const { return axes.at(axis_roles(axes).sample).elements; }
std::uint64_t ArrayDescriptor::bands() const {
  const AxisRoles roles = axis_roles(axes);
  return roles.band == std::string::npos ? 1 : axes.at(roles.band).elements;
}

ArrayDescriptor make_descriptor(std::uint64_t lines, std::uint64_t samples, std::uint64_t bands,
                                ElementType element, Interleave interleave, std::uint64_t offset_bytes) {
  ArrayDescriptor d;
  d.element = element;
  d.offset_bytes = offset_bytes;
  if (bands == 0) {
    d.axes = {{"Line", lines, 1}, {"Sample", samples, 2}};
    return d;
  }
  d.interleave = interleave;
  switch (interleave) {
    case Interleave::band_sequential:
      d.axes = {{"Band", bands, 1}, {"Line", lines, 2}, {"Sample", samples, 3}};
      break;
    case Interleave::line_interleaved:
      d.axes = {{"Line", lines, 1}, {"Band", bands, 2}, {"Sample", samples, 3}};
      break;
    case Interleave::pixel_interleaved:
      d.axes = {{"Line", lines, 1}, {"Sample", samples, 2}, {"Band", bands, 3}};
      break;
  }
  return d;
}

std::uint64_t expected_payload_bytes(const ArrayDescriptor& d) {
  constexpr std::uint64_t kMax = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
  std::uint64_t total = element_width(d.element);
  for (const auto& ax : d.axes) {
    if (ax.elements != 0 && total > kMax / ax.elements) {
      fail(ErrorCode::Overflow, "payload size exceeds 2^63-1 bytes");
    }
    total *= ax.elements;
  }
  return total;
}

Pds4Product parse_pds4(std::string_view xml_text) {
  const xml::Element root = xml::parse_tree(xml_text);
  Pds4Product p;
  p.product_class = root.name;

  if (const auto* ident = root.child("Identification_Area")) {
    if (const auto* lid = ident->child_text("logical_identifier")) p.logical_identifier = *lid;
    if (const auto* title = ident->child_text("title")) p.title = *title;
  }
  if (const auto* start = find_descendant(root, "start_date_time"); start && !start->text.empty()) {
    p.start_time = start->text;
  }
  if (const auto* obs = root.child("Observation_Area")) {
    if (const auto* osys = find_descendant(*obs, "Observing_System")) {
      for (const auto* comp : osys->children_named("Observing_System_Component")) {
        const auto* type = comp->child_text("type");
        const auto* name = comp->child_text("name");
        if (type && name && odl::iequals(*type, "Instrument")) {
          p.instrument = *name;
          break;
        }
      }
    }
  }

  const auto* area = root.child("File_Area_Observational");
  if (!area) fail(ErrorCode::MissingFileArea, root.name + " has no File_Area_Observational");
  const auto* file = area->child("File");
  if (!file || !file->child_text("file_name") || file->child_text("file_name")->empty()) {
    fail(ErrorCode::MissingFileArea, "File_Area_Observational has no File/file_name");
  }
  p.file_name = *file->child_text("file_name");

  for (const auto& c : area->children) {
    if (c.name == "Array_2D_Image") p.arrays.push_back(parse_array(c, 2));
    if (c.name == "Array_3D_Image") p.arrays.push_back(parse_array(c, 3));
  }
  return p;
}

std::pair<ArrayDescriptor, odl::PointerInfo> descriptor_from_odl(const odl::OdlLabel& label,
                                                                 std::optional<std::uint64_t> record_bytes) {
  const odl::OdlBlock* image = find_image(label);
  if (!image) fail(ErrorCode::NotFound, "label has no IMAGE object");
  const odl::OdlLabel& body = image->body;

  const std::int64_t lines = odl_required_int(body, "LINES");
  const std::int64_t samples = odl_required_int(body, "LINE_SAMPLES");
  const std::int64_t bits = odl_required_int(body, "SAMPLE_BITS");
  const auto sample_type = odl_string(body, "SAMPLE_TYPE");
  if (!sample_type) fail(ErrorCode::NotFound, "IMAGE has no SAMPLE_TYPE");
  if (lines < 1 || samples < 1) fail(ErrorCode::MalformedValue, "IMAGE dimensions must be positive");

  const auto element = map_sample_type(bits, *sample_type);
  if (!element) {
    fail(ErrorCode::UnsupportedSampleType, std::to_string(bits) + "-bit " + *sample_type);
  }

  std::uint64_t bands = 0;
  if (body.find_statement("BANDS")) {
    const std::int64_t b = odl_required_int(body, "BANDS");
    if (b < 1) fail(ErrorCode::MalformedValue, "BANDS must be positive");
    bands = static_cast<std::uint64_t>(b);
  }
  Interleave interleave = Interleave::band_sequential;
  if (const auto storage = odl_string(body, "BAND_STORAGE_TYPE")) {
    if (odl::iequals(*storage, "SAMPLE_INTERLEAVED")) interleave = Interleave::pixel_interleaved;
    else if (odl::iequals(*storage, "LINE_INTERLEAVED")) interleave = Interleave::line_interleaved;
    else if (odl::iequals(*storage, "BAND_SEQUENTIAL")) interleave = Interleave::band_sequential;
    else fail(ErrorCode::MalformedValue, "BAND_STORAGE_TYPE " + *storage);
  }

  if (!record_bytes) {
    if (const auto* rb = label.find_statement("RECORD_BYTES"); rb && rb->value.is_integer()) {
      const std::int64_t v = std::get<std::int64_t>(rb->value.data);
      if (v > 0) record_bytes = static_cast<std::uint64_t>(v);
    }
  }

  odl::PointerInfo pointer;
  if (label.find_statement("^IMAGE")) pointer = odl::pointer_target(label, "IMAGE", record_bytes);

  ArrayDescriptor d = make_descriptor(static_cast<std::uint64_t>(lines), static_cast<std::uint64_t>(samples), bands,
                                      *element, interleave, pointer.offset);
  if (const auto f = odl_number(body, "SCALING_FACTOR")) d.scaling_factor = *f;
  if (const auto o = odl_number(body, "OFFSET")) d.value_offset = *o;
  if (const auto m = odl_number(body, "MISSING_CONSTANT")) d.missing_constant = *m;
  return {d, pointer};
}

nlohmann::ordered_json to_json(const ArrayDescriptor& d) {
  nlohmann::ordered_json axes = nlohmann::ordered_json::array();
  for (const auto& ax : d.axes) {
    axes.push_back({{"name", ax.name}, {"elements", ax.elements}, {"sequence_number", ax.sequence_number}});
  }
  nlohmann::ordered_json j{
      {"axes", axes},
      {"element_type", element_name(d.element)},
      {"offset_bytes", d.offset_bytes},
      {"interleave", interleave_name(d.interleave)},
      {"scaling_factor", d.scaling_factor},
      {"value_offset", d.value_offset},
  };
  j["missing_constant"] = d.missing_constant ? nlohmann::ordered_json(*d.missing_constant) : nullptr;
  j["payload_bytes"] = expected_payload_bytes(d);
  return j;
}

nlohmann::ordered_json to_json(const Pds4Product& p) {
  nlohmann::ordered_json j;
  j["product_class"] = p.product_class;
  j["lid"] = p.logical_identifier;
  j["title"] = p.title ? nlohmann::ordered_json(*p.title) : nullptr;
  j["start_time"] = p.start_time ? nlohmann::ordered_json(*p.start_time) : nullptr;
  j["instrument"] = p.instrument ? nlohmann::ordered_json(*p.instrument) : nullptr;
  j["file"] = p.file_name;
  j["arrays"] = nlohmann::ordered_json::array();
  for (const auto& a : p.arrays) j["arrays"].push_back(to_json(a));
  return j;
}

}  // namespace lunarkit
