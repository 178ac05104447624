#include "fixtures.hpp"

#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

namespace lunarkit::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "lunarkit-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
}

void write_file(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::vector<std::uint8_t> file_bytes(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

namespace {

template <typename T>
void append_native(T v, bool big_endian, std::vector<std::uint8_t>& out) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  const bool host_big = std::endian::native == std::endian::big;
  if (host_big != big_endian) std::reverse(buf, buf + sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void encode_element(double value, ElementType type, std::vector<std::uint8_t>& out) {
  const std::string_view name = element_name(type);
  const bool be = name.ends_with("_be");
  if (name.starts_with("uint8")) append_native(static_cast<std::uint8_t>(value), be, out);
  else if (name.starts_with("int8")) append_native(static_cast<std::int8_t>(value), be, out);
  else if (name.starts_with("uint16")) append_native(static_cast<std::uint16_t>(value), be, out);
  else if (name.starts_with("int16")) append_native(static_cast<std::int16_t>(value), be, out);
  else if (name.starts_with("uint32")) append_native(static_cast<std::uint32_t>(value), be, out);
  else if (name.starts_with("int32")) append_native(static_cast<std::int32_t>(value), be, out);
  else if (name.starts_with("float32")) append_native(static_cast<float>(value), be, out);
  else append_native(value, be, out);
}

std::vector<std::uint8_t> layout_payload(const std::vector<double>& cube, const ArrayDescriptor& d) {
  // Map each storage axis to the logical coordinate it drives.
  enum Role { band, line, sample };
  std::vector<Role> roles;
  for (const auto& ax : d.axes) {
    if (ax.name == "Band") roles.push_back(band);
    else if (ax.name == "Line") roles.push_back(line);
    else roles.push_back(sample);
  }
  const std::uint64_t B = d.axes.size() == 3 ? d.bands() : 1;
  const std::uint64_t L = d.lines();
  const std::uint64_t S = d.samples();

  std::vector<std::uint8_t> out;
  std::uint64_t coord[3] = {0, 0, 0};
  const std::size_t n = d.axes.size();
  std::vector<std::uint64_t> idx(n, 0);
  for (;;) {
    for (std::size_t k = 0; k < n; ++k) coord[roles[k]] = idx[k];
    const std::uint64_t logical = (coord[band] * L + coord[line]) * S + coord[sample];
    encode_element(cube[logical], d.element, out);
    // odometer increment, innermost axis fastest
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++idx[k] < d.axes[k].elements) break;
      idx[k] = 0;
      if (k == 0) return out;
    }
  }
  (void)B;
}

std::vector<double> random_values(std::size_t n, ElementType type, std::mt19937_64& rng) {
  std::vector<double> v(n);
  const std::string_view name = element_name(type);
  for (auto& x : v) {
    if (name.starts_with("uint8")) x = static_cast<double>(rng() % 256);
    else if (name.starts_with("int8")) x = static_cast<double>(static_cast<std::int8_t>(rng()));
    else if (name.starts_with("uint16")) x = static_cast<double>(static_cast<std::uint16_t>(rng()));
    else if (name.starts_with("int16")) x = static_cast<double>(static_cast<std::int16_t>(rng()));
    else if (name.starts_with("uint32")) x = static_cast<double>(static_cast<std::uint32_t>(rng()));
    else if (name.starts_with("int32")) x = static_cast<double>(static_cast<std::int32_t>(rng()));
    else if (name.starts_with("float32")) {
      x = static_cast<double>(static_cast<float>(std::uniform_real_distribution<double>(-1e6, 1e6)(rng)));
    } else {
      x = std::uniform_real_distribution<double>(-1e12, 1e12)(rng);
    }
  }
  return v;
}

std::string pds4_label(const Pds4Fixture& f) {
  const std::string& p = f.prefix;
  auto el = [&](const std::string& name, const std::string& body) { return "<" + p + name + ">" + body + "</" + p + name + ">"; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<?xml-model href=\"http://pds.nasa.gov/pds4/pds/v1/PDS4_PDS_1B00.sch\"?>\n"
     << "<" << p << f.product_class << " xmlns" << (p.empty() ? "" : ":" + p.substr(0, p.size() - 1))
     << "=\"http://pds.nasa.gov/pds4/pds/v1\">\n"
     << "  <" << p << "Identification_Area>\n"
     << "    " << el("logical_identifier", f.lid) << "\n"
     << "    " << el("version_id", "1.0") << "\n"
     << "    " << el("title", "Chang&apos;E test product") << "\n"
     << "  </" << p << "Identification_Area>\n"
     << "  <" << p << "Observation_Area>\n";
  if (f.start_time) {
    os << "    <" << p << "Time_Coordinates>" << el("start_date_time", *f.start_time)
       << el("stop_date_time", *f.start_time) << "</" << p << "Time_Coordinates>\n";
  }
  if (f.instrument) {
    os << "    <" << p << "Observing_System>\n"
       << "      <" << p << "Observing_System_Component>" << el("name", "CE4 Rover") << el("type", "Spacecraft")
       << "</" << p << "Observing_System_Component>\n"
       << "      <" << p << "Observing_System_Component>" << el("name", *f.instrument) << el("type", "Instrument")
       << "</" << p << "Observing_System_Component>\n"
       << "    </" << p << "Observing_System>\n";
  }
  os << "  </" << p << "Observation_Area>\n"
     << "  <" << p << "File_Area_Observational>\n"
     << "    <" << p << "File>" << el("file_name", f.file_name) << el("records", "1") << "</" << p << "File>\n";

  const bool three = f.bands > 0;
  const ArrayDescriptor d = make_descriptor(f.lines, f.samples, f.bands, ElementType::uint8, f.interleave);
  const std::string arr = three ? "Array_3D_Image" : "Array_2D_Image";
  os << "    <" << p << arr << ">\n"
     << "      " << el("local_identifier", "image") << "\n"
     << "      <" << p << "offset unit=\"byte\">" << f.offset << "</" << p << "offset>\n"
     << "      " << el("axes", std::to_string(d.axes.size())) << "\n"
     << "      " << el("axis_index_order", "Last Index Fastest") << "\n"
     << "      <" << p << "Element_Array>" << el("data_type", f.data_type);
  if (f.scaling_factor) os << el("scaling_factor", fmt(*f.scaling_factor));
  if (f.value_offset) os << el("value_offset", fmt(*f.value_offset));
  os << "</" << p << "Element_Array>\n";
  std::vector<AxisSpec> axes = d.axes;
  if (f.reverse_axis_order) std::reverse(axes.begin(), axes.end());
  for (const auto& ax : axes) {
    os << "      <" << p << "Axis_Array>" << el("axis_name", ax.name) << el("elements", std::to_string(ax.elements))
       << el("sequence_number", std::to_string(ax.sequence_number)) << "</" << p << "Axis_Array>\n";
  }
  if (f.missing_constant) {
    os << "      <" << p << "Special_Constants>" << el("missing_constant", fmt(*f.missing_constant)) << "</" << p
       << "Special_Constants>\n";
  }
  os << "    </" << p << arr << ">\n"
     << "  </" << p << "File_Area_Observational>\n"
     << "</" << p << f.product_class << ">\n";
  return os.str();
}

std::string pds3_label(const Pds3Fixture& f) {
  std::ostringstream os;
  os << "PDS_VERSION_ID = PDS3\r\n"
     << "/* Chang'E-3 style detached label */\r\n";
  if (f.record_bytes) os << "RECORD_TYPE = FIXED_LENGTH\r\nRECORD_BYTES = " << *f.record_bytes << "\r\n";
  os << "PRODUCT_ID = \"" << f.product_id << "\"\r\n";
  if (f.instrument_id) os << "INSTRUMENT_ID = \"" << *f.instrument_id << "\"\r\n";
  if (f.start_time) os << "START_TIME = " << *f.start_time << "\r\n";
  os << "^IMAGE = " << f.pointer << "\r\n"
     << "OBJECT = IMAGE\r\n"
     << "  LINES = " << f.lines << "\r\n"
     << "  LINE_SAMPLES = " << f.samples << "\r\n";
  if (f.bands) os << "  BANDS = " << *f.bands << "\r\n  BAND_STORAGE_TYPE = " << f.band_storage << "\r\n";
  os << "  SAMPLE_BITS = " << f.sample_bits << "\r\n"
     << "  SAMPLE_TYPE = " << f.sample_type << "\r\n"
     << "END_OBJECT = IMAGE\r\n"
     << "END\r\n";
  return os.str();
}

std::vector<std::uint8_t> write_pds4_product(const fs::path& label_path, const Pds4Fixture& f, std::uint64_t seed) {
  write_file(label_path, pds4_label(f));
  const Pds4Product p = parse_pds4(pds4_label(f));
  const ArrayDescriptor& d = p.arrays.front();
  std::mt19937_64 rng(seed);
  const auto values = random_values(d.lines() * d.samples() * d.bands(), d.element, rng);
  std::vector<std::uint8_t> bytes(f.offset, 0);
  const auto payload = layout_payload(values, d);
  bytes.insert(bytes.end(), payload.begin(), payload.end());
  write_file(label_path.parent_path() / f.file_name, bytes);
  return bytes;
}

void make_fixture_archive(const fs::path& root) {
  Pds4Fixture pcam;
  pcam.lid = "urn:cnsa:ce4:gras:pcaml:ce4_gras_pcaml-c-012_sci_n_20190104";
  pcam.file_name = "CE4_GRAS_PCAML-C-012_SCI_N_20190104.2A";
  pcam.lines = 24;
  pcam.samples = 32;
  pcam.bands = 3;
  pcam.interleave = Interleave::pixel_interleaved;
  pcam.instrument = "PCAM";
  pcam.start_time = "2019-01-04T07:41:00.000Z";
  write_pds4_product(root / "ce4/pcam/CE4_GRAS_PCAML-C-012_SCI_N_20190104.xml", pcam, 11);

  Pds4Fixture tcam;
  tcam.prefix = "pds:";
  tcam.lid = "urn:cnsa:ce4:gras:tcam:ce4_gras_tcam-i-001_sci_n_20190103";
  tcam.file_name = "CE4_GRAS_TCAM-I-001_SCI_N_20190103.2B";
  tcam.lines = 20;
  tcam.samples = 28;
  tcam.data_type = "UnsignedMSB2";
  tcam.offset = 64;
  tcam.instrument = "TCAM";
  tcam.start_time = "2019-01-03T15:00:00.000Z";
  write_pds4_product(root / "ce4/tcam/CE4_GRAS_TCAM-I-001_SCI_N_20190103.xml", tcam, 12);

  // Detached PDS3 label, 16-bit little-endian.
  Pds3Fixture ce3;
  ce3.product_id = "CE3_BMYK_PCAMR-B-20131222";
  ce3.lines = 16;
  ce3.samples = 16;
  ce3.sample_bits = 16;
  ce3.sample_type = "LSB_UNSIGNED_INTEGER";
  ce3.pointer = "\"CE3_BMYK_PCAMR-B-20131222.IMG\"";
  ce3.instrument_id = "PCAM";
  ce3.start_time = "2013-12-22T10:00:00";
  write_file(root / "ce3/CE3_BMYK_PCAMR-B-20131222.LBL", pds3_label(ce3));
  {
    std::mt19937_64 rng(13);
    std::vector<std::uint8_t> bytes;
    for (double v : random_values(16 * 16, ElementType::uint16_le, rng)) encode_element(v, ElementType::uint16_le, bytes);
    // lower-case payload name on disk
    write_file(root / "ce3/ce3_bmyk_pcamr-b-20131222.img", bytes);
  }

  // Attached PDS3 label: 512-byte records, image from record 3.
  Pds3Fixture att;
  att.product_id = "CE3_TCAM_ATTACHED";
  att.lines = 8;
  att.samples = 64;
  att.pointer = "3";
  att.record_bytes = 512;
  att.instrument_id = "TCAM";
  std::string label = pds3_label(att);
  std::vector<std::uint8_t> bytes(label.begin(), label.end());
  bytes.resize(1024, ' ');
  std::mt19937_64 rng(14);
  for (double v : random_values(8 * 64, ElementType::uint8, rng)) encode_element(v, ElementType::uint8, bytes);
  write_file(root / "ce3/CE3_TCAM_ATTACHED.LBL", bytes);
}

std::vector<std::string> fixture_archive_labels() {
  return {"ce3/CE3_BMYK_PCAMR-B-20131222.LBL", "ce3/CE3_TCAM_ATTACHED.LBL",
          "ce4/pcam/CE4_GRAS_PCAML-C-012_SCI_N_20190104.xml", "ce4/tcam/CE4_GRAS_TCAM-I-001_SCI_N_20190103.xml"};
}

namespace {

std::string random_ident(std::mt19937_64& rng, std::size_t max_len = 12) {
  static const char first[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  static const char rest[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_";
  std::string s(1, first[rng() % 26]);
  const std::size_t len = rng() % max_len;
  for (std::size_t i = 0; i < len; ++i) s += rest[rng() % (sizeof(rest) - 1)];
  return s;
}

odl::OdlValue random_scalar(std::mt19937_64& rng) {
  using namespace odl;
  switch (rng() % 7) {
    case 0: return OdlValue{static_cast<std::int64_t>(rng())};
    case 1: return OdlValue{Real{std::uniform_real_distribution<double>(-1e6, 1e6)(rng), std::nullopt}};
    case 2: return OdlValue{Real{static_cast<double>(rng() % 1000) * 0.25, std::string(rng() % 2 ? "ms" : "DEGREES")}};
    case 3: {
      std::string t;
      const std::size_t len = rng() % 20;
      for (std::size_t i = 0; i < len; ++i) t += static_cast<char>(' ' + rng() % 95);
      t.erase(std::remove(t.begin(), t.end(), '"'), t.end());
      if (rng() % 4 == 0) t += "\nsecond line";
      return OdlValue{Text{t}};
    }
    case 4: return OdlValue{Symbol{random_ident(rng)}};
    case 5: return OdlValue{Symbol{rng() % 2 ? "N/A" : "lower case symbol"}};
    default: return OdlValue{DateTime{rng() % 2 ? "2019-01-03T15:00:00.123Z" : "2013-356T10:00:00"}};
  }
}

odl::OdlValue random_value(std::mt19937_64& rng, int nesting) {
  using namespace odl;
  if (nesting < 2 && rng() % 4 == 0) {
    std::vector<OdlValue> items;
    const std::size_t n = rng() % 4;
    for (std::size_t i = 0; i < n; ++i) items.push_back(random_value(rng, nesting + 1));
    if (rng() % 2) return OdlValue{Sequence{std::move(items)}};
    return OdlValue{Set{std::move(items)}};
  }
  return random_scalar(rng);
}

}  // namespace

odl::OdlLabel random_label(std::mt19937_64& rng, int max_depth) {
  odl::OdlLabel label;
  const std::size_t n = rng() % 6;
  for (std::size_t i = 0; i < n; ++i) {
    odl::OdlStatement st;
    const bool pointer = rng() % 8 == 0;
    st.keyword = (pointer ? "^" : "") + random_ident(rng);
    if (rng() % 5 == 0) st.keyword += ":" + random_ident(rng, 4);
    st.kind = pointer ? odl::StatementKind::pointer : odl::StatementKind::assignment;
    st.value = random_value(rng, 0);
    label.statements.push_back(std::move(st));
  }
  if (max_depth > 0) {
    const std::size_t kids = rng() % 3;
    for (std::size_t i = 0; i < kids; ++i) {
      odl::OdlBlock block;
      block.kind = rng() % 2 ? odl::BlockKind::object : odl::BlockKind::group;
      block.name = random_ident(rng);
      block.body = random_label(rng, max_depth - 1);
      label.children.push_back(std::move(block));
    }
  }
  return label;
}

fs::path fixture_dir() { return LUNARKIT_FIXTURE_DIR; }

std::vector<fs::path> odl_fixture_files() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(fixture_dir() / "odl")) {
    if (e.path().extension() == ".lbl") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace lunarkit::testing
