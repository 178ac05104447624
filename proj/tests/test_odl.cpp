#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "lunarkit/error.hpp"
#include "lunarkit/odl.hpp"
#include "lunarkit/product.hpp"

using namespace lunarkit;
using namespace lunarkit::odl;

namespace {

ErrorCode code_of(std::string_view text) {
  try {
    parse_odl(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

const char* kImageLabel =
    "PDS_VERSION_ID = PDS3\nOBJECT = IMAGE\n LINES = 2\n LINE_SAMPLES = 3\n SAMPLE_BITS = 8\nEND_OBJECT = IMAGE\nEND";

OdlStatement st(std::string kw, OdlValue v) {
  const bool ptr = kw.starts_with("^");
  return {std::move(kw), std::move(v), ptr ? StatementKind::pointer : StatementKind::assignment};
}

}  // namespace

TEST_CASE("empty label") {
  const OdlLabel l = parse_odl("END");
  CHECK(l.statements.empty());
  CHECK(l.children.empty());
  CHECK(serialize_odl(l) == "END\n");
}

TEST_CASE("IMAGE example matches a hand-built tree") {
  OdlLabel expected;
  expected.statements.push_back(st("PDS_VERSION_ID", OdlValue{Symbol{"PDS3"}}));
  OdlBlock image{BlockKind::object, "IMAGE", {}};
  image.body.statements.push_back(st("LINES", OdlValue{std::int64_t{2}}));
  image.body.statements.push_back(st("LINE_SAMPLES", OdlValue{std::int64_t{3}}));
  image.body.statements.push_back(st("SAMPLE_BITS", OdlValue{std::int64_t{8}}));
  expected.children.push_back(image);

  const OdlLabel l = parse_odl(kImageLabel);
  CHECK(l == expected);
  CHECK(parse_odl(serialize_odl(l)) == l);

  CHECK(lookup(l, {"IMAGE", "LINES"}) == OdlValue{std::int64_t{2}});
  CHECK(lookup(l, {"PDS_VERSION_ID"}) == OdlValue{Symbol{"PDS3"}});
  CHECK(lookup(l, {"image", "lines"}) == lookup(l, {"IMAGE", "LINES"}));
  CHECK_THROWS_AS(lookup(parse_odl("END"), {"X"}), Error);
}

TEST_CASE("real with unit") {
  const OdlLabel l = parse_odl("EXPOSURE_DURATION = 20 <ms>\nEND");
  REQUIRE(l.statements.size() == 1);
  CHECK(l.statements[0].value == OdlValue{Real{20.0, std::string("ms")}});
}

TEST_CASE("value forms") {
  const OdlLabel l = parse_odl(
      "A = -42\nB = 1.5E2\nC = .5\nD = \"quoted text\"\nE = 'N/A'\nF = 2019-01-03T15:00:00.123Z\n"
      "G = (1, 2)\nH = {X, Y}\nI = 16#FF#\nJ = ((1, 2), (3))\nK = ()\nL = 2013-349T13:40:00\nEND");
  CHECK(lookup(l, {"A"}) == OdlValue{std::int64_t{-42}});
  CHECK(lookup(l, {"B"}) == OdlValue{Real{150.0, std::nullopt}});
  CHECK(lookup(l, {"C"}) == OdlValue{Real{0.5, std::nullopt}});
  CHECK(lookup(l, {"D"}) == OdlValue{Text{"quoted text"}});
  CHECK(lookup(l, {"E"}) == OdlValue{Symbol{"N/A"}});
  CHECK(lookup(l, {"F"}) == OdlValue{DateTime{"2019-01-03T15:00:00.123Z"}});
  CHECK(lookup(l, {"G"}) == OdlValue{Sequence{{OdlValue{std::int64_t{1}}, OdlValue{std::int64_t{2}}}}});
  CHECK(lookup(l, {"H"}) == OdlValue{Set{{OdlValue{Symbol{"X"}}, OdlValue{Symbol{"Y"}}}}});
  CHECK(lookup(l, {"I"}) == OdlValue{std::int64_t{255}});
  CHECK(lookup(l, {"J"}).items()->size() == 2);
  CHECK(lookup(l, {"K"}).items()->empty());
  CHECK(lookup(l, {"L"}) == OdlValue{DateTime{"2013-349T13:40:00"}});
}

TEST_CASE("errors") {
  CHECK(code_of("OBJECT = IMAGE\nLINES = 1\nEND") == ErrorCode::UnbalancedBlock);
  CHECK(code_of("OBJECT = IMAGE\nEND_OBJECT = TABLE\nEND") == ErrorCode::UnbalancedBlock);
  CHECK(code_of("END_OBJECT = IMAGE\nEND") == ErrorCode::UnbalancedBlock);
  CHECK(code_of("LINES = 1\n") == ErrorCode::MissingEnd);
  CHECK(code_of("") == ErrorCode::MissingEnd);
  CHECK(code_of("A = 99999999999999999999\nEND") == ErrorCode::MalformedValue);
  CHECK(code_of("A = (((1)))\nEND") == ErrorCode::MalformedValue);
  CHECK(code_of("A = \xC3\xA9\nEND") == ErrorCode::MalformedValue);
  CHECK(code_of("A = \"unterminated\nEND") == ErrorCode::MalformedValue);
  // the value continues onto the next line, so END is consumed as a symbol
  CHECK(code_of("A = \nEND") == ErrorCode::MissingEnd);
  CHECK(code_of("A = ,\nEND") == ErrorCode::MalformedValue);

  try {
    parse_odl("A = 1\nB = 2\nC = @@\nEND");
    FAIL("expected MalformedValue");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedValue);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("non-ASCII inside quotes passes through") {
  const OdlLabel l = parse_odl("A = \"caf\xC3\xA9\"\nEND");
  CHECK(lookup(l, {"A"}) == OdlValue{Text{"caf\xC3\xA9"}});
}

TEST_CASE("comments, CRLF and content after END") {
  const OdlLabel l = parse_odl("/* header */\r\nA = 1 /* trailing */\r\nB = (1,\r\n 2)\r\nEND\r\ngarbage ((( {");
  CHECK(l.statements.size() == 2);
  CHECK(lookup(l, {"B"}).items()->size() == 2);
}

TEST_CASE("duplicates kept, lookup returns the first") {
  const OdlLabel l = parse_odl("NOTE = \"first\"\nNOTE = \"second\"\nEND");
  CHECK(l.statements.size() == 2);
  CHECK(lookup(l, {"NOTE"}) == OdlValue{Text{"first"}});
  const auto j = to_json(l);
  CHECK(j["NOTE"] == "first");
  CHECK(j["NOTE#2"] == "second");
}

TEST_CASE("namespaced keywords and END_OBJECT without name") {
  const OdlLabel l = parse_odl("CE4:LEVEL = 2\nOBJECT = IMAGE\nLINES = 1\nEND_OBJECT\nEND");
  CHECK(lookup(l, {"ce4:level"}) == OdlValue{std::int64_t{2}});
  CHECK(lookup(l, {"IMAGE", "LINES"}) == OdlValue{std::int64_t{1}});
}

TEST_CASE("nested group inside object is indented two levels") {
  const OdlLabel l = parse_odl("OBJECT = A\nGROUP = B\nX = 1\nEND_GROUP = B\nEND_OBJECT = A\nEND");
  const std::string s = serialize_odl(l);
  CHECK(s == "OBJECT = A\n  GROUP = B\n    X = 1\n  END_GROUP = B\nEND_OBJECT = A\nEND\n");
}

TEST_CASE("pointer forms") {
  const OdlLabel l = parse_odl(
      "^IMAGE = \"A.IMG\"\n^TABLE = 5\n^HEADER = (\"F.IMG\", 5)\n^SPECTRUM = 2049 <BYTES>\nEND");
  CHECK(pointer_target(l, "IMAGE", std::nullopt) == PointerInfo{std::string("A.IMG"), 0, OffsetUnit::bytes});
  CHECK(pointer_target(l, "TABLE", 100) == PointerInfo{std::nullopt, 400, OffsetUnit::bytes});
  CHECK(pointer_target(l, "HEADER", 512) == PointerInfo{std::string("F.IMG"), 2048, OffsetUnit::bytes});
  CHECK(pointer_target(l, "SPECTRUM", std::nullopt) == PointerInfo{std::nullopt, 2048, OffsetUnit::bytes});
  CHECK(pointer_raw(l, "TABLE") == PointerInfo{std::nullopt, 4, OffsetUnit::records});
  try {
    pointer_target(l, "TABLE", std::nullopt);
    FAIL("expected NeedsRecordBytes");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NeedsRecordBytes);
  }
  try {
    pointer_target(l, "MISSING", 1);
    FAIL("expected NotFound");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotFound);
  }
}

TEST_CASE("json rendering") {
  const auto j = to_json(parse_odl("T = 20 <ms>\nOBJECT = IMAGE\nLINES = 2\nEND_OBJECT = IMAGE\nEND"));
  CHECK(j["T"]["value"] == 20.0);
  CHECK(j["T"]["unit"] == "ms");
  CHECK(j["IMAGE"]["LINES"] == 2);
}

TEST_CASE("fixture corpus round trips") {
  const auto files = testing::odl_fixture_files();
  REQUIRE(files.size() >= 8);
  for (const auto& f : files) {
    CAPTURE(f);
    const OdlLabel once = parse_odl(read_file_text(f));
    const OdlLabel twice = parse_odl(serialize_odl(once));
    CHECK(twice == once);
    CHECK(serialize_odl(twice) == serialize_odl(once));
  }
}

TEST_CASE("multi-line text joins with LF") {
  const OdlLabel l = parse_odl(read_file_text(testing::fixture_dir() / "odl/ce3_multiline_text.lbl"));
  const auto s = lookup(l, {"DESCRIPTION"}).as_string();
  REQUIRE(s);
  CHECK(s->find('\r') == std::string::npos);
  CHECK(s->find("ground research") != std::string::npos);
}

TEST_CASE("property: random labels survive serialize then parse") {
  std::mt19937_64 rng(20240601);
  for (int i = 0; i < 500; ++i) {
    const OdlLabel l = testing::random_label(rng);
    const std::string text = serialize_odl(l);
    CAPTURE(text);
    const OdlLabel back = parse_odl(text);
    REQUIRE(back == l);
  }
}

TEST_CASE("property: lookup is case-insensitive on random labels") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const OdlLabel l = testing::random_label(rng);
    for (const auto& s : l.statements) {
      std::string lower = s.keyword;
      for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      CHECK(lookup(l, {lower}) == lookup(l, {s.keyword}));
    }
  }
}
