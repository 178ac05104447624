#pragma once

// PDS3 ODL label model and parser.
//
// Accepted grammar subset:
//
//   label      := { statement | block } "END" <anything>
//   block      := ("OBJECT" | "GROUP") "=" name  label-body
//                 ("END_OBJECT" | "END_GROUP") [ "=" name ]
//   statement  := keyword "=" value
//   keyword    := ["^"] letter { letter | digit | "_" | ":" }
//   value      := scalar [ "<" unit ">" ] | sequence | set
//   sequence   := "(" [ element { "," element } ] ")"
//   set        := "{" [ element { "," element } ] "}"
//   element    := scalar [ "<" unit ">" ] | sequence | set     (one nesting level)
//   scalar     := integer | based-integer | real | "text" | 'symbol'
//               | bare-symbol | datetime
//
// Whitespace (including line breaks) separates tokens, so a value that is
// still open at the end of a line continues on the next. Comments are
// /* ... */ and may appear anywhere outside quoted text.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace lunarkit::odl {

struct OdlValue;

struct Real {
  double value = 0.0;
  std::optional<std::string> unit;
  bool operator==(const Real&) const = default;
};
struct Text {
  std::string value;
  bool operator==(const Text&) const = default;
};
struct Symbol {
  std::string value;
  bool operator==(const Symbol&) const = default;
};
struct DateTime {
  std::string value;
  bool operator==(const DateTime&) const = default;
};
struct Sequence {
  std::vector<OdlValue> items;
  bool operator==(const Sequence& other) const;
};
struct Set {
  std::vector<OdlValue> items;
  bool operator==(const Set& other) const;
};

struct OdlValue {
  using Storage = std::variant<std::int64_t, Real, Text, Symbol, DateTime, Sequence, Set>;
  Storage data;

  bool operator==(const OdlValue&) const = default;

  bool is_integer() const { return std::holds_alternative<std::int64_t>(data); }
  bool is_real() const { return std::holds_alternative<Real>(data); }
  bool is_collection() const {
    return std::holds_alternative<Sequence>(data) || std::holds_alternative<Set>(data);
  }
  // Text, symbol, and datetime values as a string; nullopt otherwise.
  std::optional<std::string> as_string() const;
  // Integers and reals (unit ignored); nullopt otherwise.
  std::optional<double> as_number() const;
  const std::vector<OdlValue>* items() const;
};

inline bool Sequence::operator==(const Sequence& other) const { return items == other.items; }
inline bool Set::operator==(const Set& other) const { return items == other.items; }

enum class StatementKind { assignment, pointer };

struct OdlStatement {
  std::string keyword;
  OdlValue value;
  StatementKind kind = StatementKind::assignment;
  bool operator==(const OdlStatement&) const = default;
};

enum class BlockKind { object, group };

struct OdlBlock;

struct OdlLabel {
  std::vector<OdlStatement> statements;
  std::vector<OdlBlock> children;

  bool operator==(const OdlLabel& other) const;

  const OdlStatement* find_statement(std::string_view keyword) const;
  const OdlBlock* find_child(std::string_view name) const;
};

struct OdlBlock {
  BlockKind kind = BlockKind::object;
  std::string name;
  OdlLabel body;
  bool operator==(const OdlBlock&) const = default;
};

inline bool OdlLabel::operator==(const OdlLabel& other) const {
  return statements == other.statements && children == other.children;
}

enum class OffsetUnit { bytes, records };

struct PointerInfo {
  std::optional<std::string> target_file;  // absent: attached label
  std::uint64_t offset = 0;
  OffsetUnit offset_unit = OffsetUnit::bytes;
  bool operator==(const PointerInfo&) const = default;
};

// Throws Error{UnbalancedBlock, MissingEnd, MalformedValue}; diagnostics carry
// the 1-based line number.
OdlLabel parse_odl(std::string_view text);

// path alternates block names and ends with a keyword; case-insensitive.
// Throws Error{NotFound}.
const OdlValue& lookup(const OdlLabel& label, const std::vector<std::string>& path);

// Pointer as written: record offsets stay in records (converted to 0-based).
PointerInfo pointer_raw(const OdlLabel& label, std::string_view name);

// name is given without the leading '^'. Record offsets are 1-based and are
// resolved to bytes with record_bytes. Throws Error{NotFound, NeedsRecordBytes}.
PointerInfo pointer_target(const OdlLabel& label, std::string_view name,
                           std::optional<std::uint64_t> record_bytes);

std::string serialize_value(const OdlValue& value);
// Canonical text: one statement per line, two spaces of indent per depth,
// statements before child blocks, LF endings, terminated by "END\n".
std::string serialize_odl(const OdlLabel& label);

// Keyword -> value tree. Reals with units render as {"value":v,"unit":u};
// repeated keys at one level get a "#2", "#3", ... suffix.
nlohmann::ordered_json to_json(const OdlLabel& label);
nlohmann::ordered_json to_json(const OdlValue& value);

bool iequals(std::string_view a, std::string_view b) noexcept;

}  // namespace lunarkit::odl
