#include "lunarkit/odl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <regex>
#include <string>

#include "lunarkit/error.hpp"

namespace lunarkit::odl {

namespace {

enum class TokKind { word, equals, lparen, rparen, lbrace, rbrace, comma, unit, text, quoted_symbol, eof };

struct Token {
  TokKind kind = TokKind::eof;
  std::string value;
  int line = 1;
};

std::string at_line(int line) { return "line " + std::to_string(line); }

bool is_word_char(unsigned char c) {
  if (c <= 0x20 || c >= 0x7f) return false;
  switch (c) {
    case '=': case ',': case '(': case ')': case '{': case '}':
    case '<': case '>': case '"': case '\'':
      return false;
    default:
      return true;
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    if (peeked_) {
      Token t = std::move(*peeked_);
      peeked_.reset();
      return t;
    }
    return scan();
  }

  const Token& peek() {
    if (!peeked_) peeked_ = scan();
    return *peeked_;
  }

 private:
  Token scan() {
    skip_space_and_comments();
    Token tok;
    tok.line = line_;
    if (pos_ >= text_.size()) return tok;
    const unsigned char c = static_cast<unsigned char>(text_[pos_]);
    switch (c) {
      case '=': ++pos_; tok.kind = TokKind::equals; return tok;
      case '(': ++pos_; tok.kind = TokKind::lparen; return tok;
      case ')': ++pos_; tok.kind = TokKind::rparen; return tok;
      case '{': ++pos_; tok.kind = TokKind::lbrace; return tok;
      case '}': ++pos_; tok.kind = TokKind::rbrace; return tok;
      case ',': ++pos_; tok.kind = TokKind::comma; return tok;
      case '"': tok.kind = TokKind::text; tok.value = quoted('"', true); return tok;
      case '\'': tok.kind = TokKind::quoted_symbol; tok.value = quoted('\'', false); return tok;
      case '<': tok.kind = TokKind::unit; tok.value = unit(); return tok;
      default: break;
    }
    if (c >= 0x80) fail(ErrorCode::MalformedValue, at_line(line_) + ": non-ASCII byte outside quoted text");
    if (!is_word_char(c)) {
      fail(ErrorCode::MalformedValue, at_line(line_) + ": unexpected character '" + std::string(1, static_cast<char>(c)) + "'");
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size()) {
      const unsigned char w = static_cast<unsigned char>(text_[pos_]);
      if (w == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '*') break;
      if (w >= 0x80) fail(ErrorCode::MalformedValue, at_line(line_) + ": non-ASCII byte outside quoted text");
      if (!is_word_char(w)) break;
      ++pos_;
    }
    tok.kind = TokKind::word;
    tok.value = std::string(text_.substr(start, pos_ - start));
    return tok;
  }

  void skip_space_and_comments() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
        ++pos_;
      } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '*') {
        const int open_line = line_;
        const std::size_t close = text_.find("*/", pos_ + 2);
        if (close == std::string_view::npos) fail(ErrorCode::MalformedValue, at_line(open_line) + ": unterminated comment");
        line_ += static_cast<int>(std::count(text_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                             text_.begin() + static_cast<std::ptrdiff_t>(close), '\n'));
        pos_ = close + 2;
      } else {
        break;
      }
    }
  }

  std::string quoted(char delim, bool multiline) {
    const int open_line = line_;
    ++pos_;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != delim) {
      const char c = text_[pos_];
      if (c == '\n') {
        if (!multiline) fail(ErrorCode::MalformedValue, at_line(open_line) + ": unterminated quoted symbol");
        ++line_;
      }
      if (c == '\r' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n') {
        ++pos_;
        continue;
      }
      out.push_back(c);
      ++pos_;
    }
    if (pos_ >= text_.size()) fail(ErrorCode::MalformedValue, at_line(open_line) + ": unterminated quote");
    ++pos_;
    return out;
  }

  std::string unit() {
    const int open_line = line_;
    const std::size_t close = text_.find('>', pos_ + 1);
    if (close == std::string_view::npos) fail(ErrorCode::MalformedValue, at_line(open_line) + ": unterminated unit");
    std::string out(text_.substr(pos_ + 1, close - pos_ - 1));
    if (out.find('\n') != std::string::npos || out.find('<') != std::string::npos) {
      fail(ErrorCode::MalformedValue, at_line(open_line) + ": malformed unit");
    }
    for (unsigned char c : out) {
      if (c >= 0x80) fail(ErrorCode::MalformedValue, at_line(open_line) + ": non-ASCII byte in unit");
    }
    pos_ = close + 1;
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::optional<Token> peeked_;
};

const std::regex& integer_re() {
  static const std::regex re(R"([+-]?[0-9]+)");
  return re;
}
const std::regex& based_re() {
  static const std::regex re(R"(([+-]?)([0-9]+)#([0-9A-Fa-f]+)#)");
  return re;
}
const std::regex& real_re() {
  static const std::regex re(R"([+-]?([0-9]+\.[0-9]*|\.[0-9]+|[0-9]+)([eE][+-]?[0-9]+)?)");
  return re;
}
const std::regex& datetime_re() {
  static const std::regex re(
      R"([0-9]{4}-([0-9]{2}-[0-9]{2}|[0-9]{3})(T[0-9]{2}(:[0-9]{2}(:[0-9]{2}(\.[0-9]+)?)?)?Z?)?)"
      R"(|[0-9]{2}:[0-9]{2}(:[0-9]{2}(\.[0-9]+)?)?Z?)");
  return re;
}
const std::regex& symbol_re() {
  static const std::regex re(R"([A-Za-z0-9][A-Za-z0-9_:./+\-]*)");
  return re;
}
const std::regex& keyword_re() {
  static const std::regex re(R"(\^?[A-Za-z][A-Za-z0-9_:]*)");
  return re;
}

std::string_view strip_plus(std::string_view s) {
  return (!s.empty() && s.front() == '+') ? s.substr(1) : s;
}

std::optional<OdlValue> classify_word(const std::string& word, int line) {
  if (std::regex_match(word, integer_re())) {
    std::int64_t v = 0;
    const std::string_view digits = strip_plus(word);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) {
      fail(ErrorCode::MalformedValue, at_line(line) + ": integer out of 64-bit range: " + word);
    }
    return OdlValue{v};
  }
  std::smatch m;
  if (std::regex_match(word, m, based_re())) {
    const int base = std::stoi(m[2].str());
    if (base < 2 || base > 16) fail(ErrorCode::MalformedValue, at_line(line) + ": bad radix in " + word);
    const std::string digits = m[3].str();
    std::uint64_t mag = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), mag, base);
    const bool negative = m[1].str() == "-";
    const std::uint64_t limit = negative ? std::uint64_t{1} << 63 : (std::uint64_t{1} << 63) - 1;
    if (ec != std::errc() || ptr != digits.data() + digits.size() || mag > limit) {
      fail(ErrorCode::MalformedValue, at_line(line) + ": bad based integer " + word);
    }
    const std::int64_t v = negative ? static_cast<std::int64_t>(0 - mag) : static_cast<std::int64_t>(mag);
    return OdlValue{v};
  }
  if (std::regex_match(word, real_re())) {
    double v = 0.0;
    const std::string_view digits = strip_plus(word);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || !std::isfinite(v)) {
      fail(ErrorCode::MalformedValue, at_line(line) + ": real out of range: " + word);
    }
    return OdlValue{Real{v, std::nullopt}};
  }
  if (std::regex_match(word, datetime_re())) return OdlValue{DateTime{word}};
  if (std::regex_match(word, symbol_re())) return OdlValue{Symbol{word}};
  return std::nullopt;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) {}

  OdlLabel parse() {
    OdlLabel label;
    parse_body(label, nullptr);
    return label;
  }

 private:
  struct Open {
    BlockKind kind;
    std::string name;
    int line;
  };

  void parse_body(OdlLabel& into, const Open* open) {
    for (;;) {
      Token tok = lex_.next();
      if (tok.kind == TokKind::eof) {
        if (open) {
          fail(ErrorCode::UnbalancedBlock, at_line(open->line) + ": " + kind_word(open->kind) + " = " + open->name +
                                               " has no matching END_" + kind_word(open->kind));
        }
        fail(ErrorCode::MissingEnd, "label has no END statement");
      }
      if (tok.kind != TokKind::word) fail(ErrorCode::MalformedValue, at_line(tok.line) + ": expected a keyword");

      if (iequals(tok.value, "END")) {
        if (open) {
          fail(ErrorCode::UnbalancedBlock,
               at_line(tok.line) + ": END inside " + kind_word(open->kind) + " = " + open->name);
        }
        return;
      }
      if (iequals(tok.value, "END_OBJECT") || iequals(tok.value, "END_GROUP")) {
        const BlockKind kind = iequals(tok.value, "END_OBJECT") ? BlockKind::object : BlockKind::group;
        if (!open) fail(ErrorCode::UnbalancedBlock, at_line(tok.line) + ": " + tok.value + " without opener");
        if (kind != open->kind) {
          fail(ErrorCode::UnbalancedBlock, at_line(tok.line) + ": " + tok.value + " closes " +
                                               kind_word(open->kind) + " = " + open->name);
        }
        if (lex_.peek().kind == TokKind::equals) {
          lex_.next();
          Token name = lex_.next();
          if (name.kind != TokKind::word || !iequals(name.value, open->name)) {
            fail(ErrorCode::UnbalancedBlock, at_line(tok.line) + ": " + tok.value + " = " + name.value +
                                                 " does not match " + open->name);
          }
        }
        return;
      }

      if (!std::regex_match(tok.value, keyword_re())) {
        fail(ErrorCode::MalformedValue, at_line(tok.line) + ": invalid keyword '" + tok.value + "'");
      }
      Token eq = lex_.next();
      if (eq.kind != TokKind::equals) {
        fail(ErrorCode::MalformedValue, at_line(tok.line) + ": expected '=' after " + tok.value);
      }

      if (iequals(tok.value, "OBJECT") || iequals(tok.value, "GROUP")) {
        const BlockKind kind = iequals(tok.value, "OBJECT") ? BlockKind::object : BlockKind::group;
        Token name = lex_.next();
        if (name.kind != TokKind::word || name.value.front() == '^' ||
            !std::regex_match(name.value, keyword_re())) {
          fail(ErrorCode::MalformedValue, at_line(tok.line) + ": invalid block name");
        }
        OdlBlock block{kind, name.value, {}};
        const Open inner{kind, name.value, tok.line};
        parse_body(block.body, &inner);
        into.children.push_back(std::move(block));
        continue;
      }

      OdlStatement st;
      st.keyword = tok.value;
      st.kind = tok.value.front() == '^' ? StatementKind::pointer : StatementKind::assignment;
      st.value = parse_value(0, tok.line);
      into.statements.push_back(std::move(st));
    }
  }

  OdlValue parse_value(int nesting, int line) {
    Token tok = lex_.next();
    switch (tok.kind) {
      case TokKind::lparen:
      case TokKind::lbrace: {
        if (nesting >= 2) fail(ErrorCode::MalformedValue, at_line(tok.line) + ": collections nest at most one level");
        const TokKind close = tok.kind == TokKind::lparen ? TokKind::rparen : TokKind::rbrace;
        std::vector<OdlValue> items;
        if (lex_.peek().kind == close) {
          lex_.next();
        } else {
          for (;;) {
            items.push_back(parse_value(nesting + 1, tok.line));
            Token sep = lex_.next();
            if (sep.kind == close) break;
            if (sep.kind != TokKind::comma) {
              fail(ErrorCode::MalformedValue, at_line(sep.line) + ": expected ',' or closing bracket");
            }
          }
        }
        if (close == TokKind::rparen) return OdlValue{Sequence{std::move(items)}};
        return OdlValue{Set{std::move(items)}};
      }
      case TokKind::text:
        return OdlValue{Text{std::move(tok.value)}};
      case TokKind::quoted_symbol:
        return OdlValue{Symbol{std::move(tok.value)}};
      case TokKind::word: {
        std::optional<OdlValue> v = classify_word(tok.value, tok.line);
        if (!v) fail(ErrorCode::MalformedValue, at_line(tok.line) + ": unrecognized value '" + tok.value + "'");
        if (lex_.peek().kind == TokKind::unit) {
          Token u = lex_.next();
          if (auto* i = std::get_if<std::int64_t>(&v->data)) {
            const double d = static_cast<double>(*i);
            if (static_cast<long double>(d) != static_cast<long double>(*i)) {
              fail(ErrorCode::MalformedValue, at_line(u.line) + ": integer with unit is not exactly representable");
            }
            return OdlValue{Real{d, u.value}};
          }
          if (auto* r = std::get_if<Real>(&v->data)) {
            r->unit = u.value;
            return *v;
          }
          fail(ErrorCode::MalformedValue, at_line(u.line) + ": unit attached to a non-numeric value");
        }
        return *v;
      }
      default:
        fail(ErrorCode::MalformedValue, at_line(tok.kind == TokKind::eof ? line : tok.line) + ": expected a value");
    }
  }

  static std::string kind_word(BlockKind k) { return k == BlockKind::object ? "OBJECT" : "GROUP"; }

  Lexer lex_;
};

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ptr);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

bool bare_symbol_ok(const std::string& s) {
  if (s.empty() || !std::regex_match(s, symbol_re())) return false;
  const auto v = classify_word(s, 0);
  return v && std::holds_alternative<Symbol>(v->data);
}

void serialize_label(const OdlLabel& label, int depth, std::string& out) {
  const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  for (const auto& st : label.statements) {
    out += indent;
    out += st.keyword;
    out += " = ";
    out += serialize_value(st.value);
    out += '\n';
  }
  for (const auto& child : label.children) {
    const char* word = child.kind == BlockKind::object ? "OBJECT" : "GROUP";
    out += indent + word + " = " + child.name + '\n';
    serialize_label(child.body, depth + 1, out);
    out += indent + "END_" + word + " = " + child.name + '\n';
  }
}

void insert_unique(nlohmann::ordered_json& obj, const std::string& key, nlohmann::ordered_json value) {
  if (!obj.contains(key)) {
    obj[key] = std::move(value);
    return;
  }
  for (int n = 2;; ++n) {
    const std::string candidate = key + "#" + std::to_string(n);
    if (!obj.contains(candidate)) {
      obj[candidate] = std::move(value);
      return;
    }
  }
}

}  // namespace

bool iequals(std::string_view a, std::string_view b) noexcept {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

std::optional<std::string> OdlValue::as_string() const {
  if (auto* t = std::get_if<Text>(&data)) return t->value;
  if (auto* s = std::get_if<Symbol>(&data)) return s->value;
  if (auto* d = std::get_if<DateTime>(&data)) return d->value;
  return std::nullopt;
}

std::optional<double> OdlValue::as_number() const {
  if (auto* i = std::get_if<std::int64_t>(&data)) return static_cast<double>(*i);
  if (auto* r = std::get_if<Real>(&data)) return r->value;
  return std::nullopt;
}

const std::vector<OdlValue>* OdlValue::items() const {
  if (auto* s = std::get_if<Sequence>(&data)) return &s->items;
  if (auto* s = std::get_if<Set>(&data)) return &s->items;
  return nullptr;
}

const OdlStatement* OdlLabel::find_statement(std::string_view keyword) const {
  for (const auto& st : statements) {
    if (iequals(st.keyword, keyword)) return &st;
  }
  return nullptr;
}

const OdlBlock* OdlLabel::find_child(std::string_view name) const {
  for (const auto& child : children) {
    if (iequals(child.name, name)) return &child;
  }
  return nullptr;
}

OdlLabel parse_odl(std::string_view text) { return Parser(text).parse(); }

const OdlValue& lookup(const OdlLabel& label, const std::vector<std::string>& path) {
  if (path.empty()) fail(ErrorCode::NotFound, "empty lookup path");
  const OdlLabel* cursor = &label;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const OdlBlock* child = cursor->find_child(path[i]);
    if (!child) fail(ErrorCode::NotFound, "no block named " + path[i]);
    cursor = &child->body;
  }
  const OdlStatement* st = cursor->find_statement(path.back());
  if (!st) fail(ErrorCode::NotFound, "no keyword " + path.back());
  return st->value;
}

PointerInfo pointer_raw(const OdlLabel& label, std::string_view name) {
  const OdlStatement* st = label.find_statement("^" + std::string(name));
  if (!st) fail(ErrorCode::NotFound, "no pointer ^" + std::string(name));

  // An offset is either a 1-based record number or a 1-based byte position <BYTES>.
  auto offset_of = [&](const OdlValue& v, PointerInfo& info) {
    double position = 0.0;
    if (auto* i = std::get_if<std::int64_t>(&v.data)) {
      position = static_cast<double>(*i);
      info.offset_unit = OffsetUnit::records;
    } else if (auto* r = std::get_if<Real>(&v.data); r && r->unit && iequals(*r->unit, "BYTES")) {
      position = r->value;
      info.offset_unit = OffsetUnit::bytes;
    } else {
      fail(ErrorCode::MalformedValue, "pointer ^" + std::string(name) + " has an unsupported offset");
    }
    if (position < 1.0 || position != std::floor(position) || position > 9.0e15) {
      fail(ErrorCode::MalformedValue, "pointer ^" + std::string(name) + " offset must be a positive integer");
    }
    info.offset = static_cast<std::uint64_t>(position) - 1;
  };

  PointerInfo info;
  if (auto* t = std::get_if<Text>(&st->value.data)) {
    info.target_file = t->value;
  } else if (auto* seq = std::get_if<Sequence>(&st->value.data)) {
    if (seq->items.empty() || seq->items.size() > 2 || !std::holds_alternative<Text>(seq->items[0].data)) {
      fail(ErrorCode::MalformedValue, "pointer ^" + std::string(name) + " must be (\"FILE\"[, offset])");
    }
    info.target_file = std::get<Text>(seq->items[0].data).value;
    if (seq->items.size() == 2) offset_of(seq->items[1], info);
  } else {
    offset_of(st->value, info);
  }
  return info;
}

PointerInfo pointer_target(const OdlLabel& label, std::string_view name,
                           std::optional<std::uint64_t> record_bytes) {
  PointerInfo info = pointer_raw(label, name);
  if (info.offset_unit == OffsetUnit::records) {
    if (!record_bytes) fail(ErrorCode::NeedsRecordBytes, "pointer ^" + std::string(name) + " is a record offset");
    if (*record_bytes != 0 && info.offset > std::numeric_limits<std::uint64_t>::max() / *record_bytes) {
      fail(ErrorCode::Overflow, "pointer ^" + std::string(name) + " byte offset overflows");
    }
    info.offset *= *record_bytes;
    info.offset_unit = OffsetUnit::bytes;
  }
  return info;
}

std::string serialize_value(const OdlValue& value) {
  struct Visitor {
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(const Real& r) const {
      std::string s = format_real(r.value);
      if (r.unit) s += " <" + *r.unit + ">";
      return s;
    }
    std::string operator()(const Text& t) const { return "\"" + t.value + "\""; }
    std::string operator()(const Symbol& s) const {
      return bare_symbol_ok(s.value) ? s.value : "'" + s.value + "'";
    }
    std::string operator()(const DateTime& d) const { return d.value; }
    std::string operator()(const Sequence& s) const { return join(s.items, '(', ')'); }
    std::string operator()(const Set& s) const { return join(s.items, '{', '}'); }

    static std::string join(const std::vector<OdlValue>& items, char open, char close) {
      std::string out(1, open);
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += serialize_value(items[i]);
      }
      out += close;
      return out;
    }
  };
  return std::visit(Visitor{}, value.data);
}

std::string serialize_odl(const OdlLabel& label) {
  std::string out;
  serialize_label(label, 0, out);
  out += "END\n";
  return out;
}

nlohmann::ordered_json to_json(const OdlValue& value) {
  using json = nlohmann::ordered_json;
  struct Visitor {
    json operator()(std::int64_t v) const { return v; }
    json operator()(const Real& r) const {
      if (!r.unit) return r.value;
      return json{{"value", r.value}, {"unit", *r.unit}};
    }
    json operator()(const Text& t) const { return t.value; }
    json operator()(const Symbol& s) const { return s.value; }
    json operator()(const DateTime& d) const { return d.value; }
    json operator()(const Sequence& s) const { return list(s.items); }
    json operator()(const Set& s) const { return list(s.items); }
    static json list(const std::vector<OdlValue>& items) {
      json arr = json::array();
      for (const auto& item : items) arr.push_back(to_json(item));
      return arr;
    }
  };
  return std::visit(Visitor{}, value.data);
}

nlohmann::ordered_json to_json(const OdlLabel& label) {
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  for (const auto& st : label.statements) insert_unique(obj, st.keyword, to_json(st.value));
  for (const auto& child : label.children) insert_unique(obj, child.name, to_json(child.body));
  return obj;
}

}  // namespace lunarkit::odl
