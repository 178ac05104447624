#include "lunarkit/xml_reader.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "lunarkit/error.hpp"

namespace lunarkit::xml {

namespace {

[[noreturn]] void malformed(int line, const std::string& what) {
  fail(ErrorCode::XmlMalformed, "line " + std::to_string(line) + ": " + what);
}

bool is_name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':' || static_cast<unsigned char>(c) >= 0x80;
}
bool is_name_char(char c) {
  return is_name_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.';
}
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::string local_name(std::string_view qname) {
  const auto colon = qname.rfind(':');
  return std::string(colon == std::string_view::npos ? qname : qname.substr(colon + 1));
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

Reader::Reader(std::string_view text) : text_(text) {
  // UTF-8 byte order mark
  if (text_.size() >= 3 && text_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
}

std::string Reader::decode_entities(std::string_view raw, int line) const {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != '&') {
      out.push_back(raw[i]);
      continue;
    }
    const std::size_t semi = raw.find(';', i);
    if (semi == std::string_view::npos) malformed(line, "unterminated entity reference");
    const std::string_view ent = raw.substr(i + 1, semi - i - 1);
    if (ent == "lt") out.push_back('<');
    else if (ent == "gt") out.push_back('>');
    else if (ent == "amp") out.push_back('&');
    else if (ent == "quot") out.push_back('"');
    else if (ent == "apos") out.push_back('\'');
    else if (ent.size() > 1 && ent[0] == '#') {
      const bool hex = ent[1] == 'x' || ent[1] == 'X';
      const std::string_view digits = ent.substr(hex ? 2 : 1);
      unsigned long cp = 0;
      const auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
      if (digits.empty() || ec != std::errc() || p != digits.data() + digits.size() || cp > 0x10FFFF) {
        malformed(line, "bad character reference &" + std::string(ent) + ";");
      }
      append_utf8(out, cp);
    } else {
      malformed(line, "unknown entity &" + std::string(ent) + ";");
    }
    i = semi;
  }
  return out;
}

void Reader::skip_misc() {
  for (;;) {
    while (pos_ < text_.size() && is_space(text_[pos_])) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
    auto skip_past = [&](std::string_view close, const char* what) {
      const std::size_t end = text_.find(close, pos_);
      if (end == std::string_view::npos) malformed(line_, std::string("unterminated ") + what);
      line_ += static_cast<int>(std::count(text_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                           text_.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
      pos_ = end + close.size();
    };
    const std::string_view rest = text_.substr(pos_);
    if (rest.starts_with("<?")) {
      skip_past("?>", "processing instruction");
    } else if (rest.starts_with("<!--")) {
      skip_past("-->", "comment");
    } else if (rest.starts_with("<!DOCTYPE")) {
      // Internal subsets are not supported; skip to the first '>' outside brackets.
      int depth = 0;
      for (; pos_ < text_.size(); ++pos_) {
        const char c = text_[pos_];
        if (c == '\n') ++line_;
        if (c == '[') ++depth;
        if (c == ']') --depth;
        if (c == '>' && depth == 0) break;
      }
      if (pos_ >= text_.size()) malformed(line_, "unterminated DOCTYPE");
      ++pos_;
    } else {
      return;
    }
  }
}

Event Reader::next() {
  if (pending_end_) {
    pending_end_ = false;
    Event ev;
    ev.kind = EventKind::end_element;
    ev.name = local_name(pending_name_);
    ev.line = line_;
    open_.pop_back();
    return ev;
  }
  for (;;) {
    if (open_.empty()) {
      skip_misc();
      if (pos_ >= text_.size()) {
        if (!seen_root_) malformed(line_, "document has no root element");
        return Event{};
      }
      if (seen_root_) malformed(line_, "content after the root element");
      if (text_[pos_] != '<') malformed(line_, "text outside the root element");
      return read_tag();
    }
    if (pos_ >= text_.size()) malformed(line_, "unexpected end of document inside <" + open_.back() + ">");

    const std::string_view rest = text_.substr(pos_);
    if (rest.starts_with("<!--")) {
      const std::size_t end = text_.find("-->", pos_);
      if (end == std::string_view::npos) malformed(line_, "unterminated comment");
      line_ += static_cast<int>(std::count(text_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                           text_.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
      pos_ = end + 3;
      continue;
    }
    if (rest.starts_with("<?")) {
      const std::size_t end = text_.find("?>", pos_);
      if (end == std::string_view::npos) malformed(line_, "unterminated processing instruction");
      line_ += static_cast<int>(std::count(text_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                           text_.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
      pos_ = end + 2;
      continue;
    }
    if (rest.starts_with("<![CDATA[")) {
      const std::size_t end = text_.find("]]>", pos_);
      if (end == std::string_view::npos) malformed(line_, "unterminated CDATA section");
      Event ev;
      ev.kind = EventKind::text;
      ev.line = line_;
      ev.text = std::string(text_.substr(pos_ + 9, end - pos_ - 9));
      line_ += static_cast<int>(std::count(ev.text.begin(), ev.text.end(), '\n'));
      pos_ = end + 3;
      return ev;
    }
    if (rest.starts_with("<!")) malformed(line_, "markup declaration inside an element");
    if (rest.front() == '<') return read_tag();
    return read_text();
  }
}

Event Reader::read_text() {
  const std::size_t end = std::min(text_.find('<', pos_), text_.size());
  Event ev;
  ev.kind = EventKind::text;
  ev.line = line_;
  const std::string_view raw = text_.substr(pos_, end - pos_);
  line_ += static_cast<int>(std::count(raw.begin(), raw.end(), '\n'));
  pos_ = end;
  ev.text = decode_entities(raw, ev.line);
  return ev;
}

Event Reader::read_tag() {
  const int tag_line = line_;
  ++pos_;  // '<'
  const bool closing = pos_ < text_.size() && text_[pos_] == '/';
  if (closing) ++pos_;

  const std::size_t name_start = pos_;
  if (pos_ >= text_.size() || !is_name_start(text_[pos_])) malformed(tag_line, "invalid tag name");
  while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
  const std::string qname(text_.substr(name_start, pos_ - name_start));

  auto skip_ws = [&] {
    while (pos_ < text_.size() && is_space(text_[pos_])) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
  };

  Event ev;
  ev.line = tag_line;
  ev.name = local_name(qname);

  if (closing) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != '>') malformed(tag_line, "malformed end tag </" + qname);
    ++pos_;
    if (open_.empty() || open_.back() != qname) {
      malformed(tag_line, "end tag </" + qname + "> does not match <" + (open_.empty() ? "" : open_.back()) + ">");
    }
    open_.pop_back();
    ev.kind = EventKind::end_element;
    return ev;
  }

  for (;;) {
    skip_ws();
    if (pos_ >= text_.size()) malformed(tag_line, "unterminated start tag <" + qname);
    const char c = text_[pos_];
    if (c == '>') {
      ++pos_;
      break;
    }
    if (c == '/') {
      if (pos_ + 1 >= text_.size() || text_[pos_ + 1] != '>') malformed(tag_line, "stray '/' in <" + qname);
      pos_ += 2;
      pending_end_ = true;
      pending_name_ = qname;
      break;
    }
    if (!is_name_start(c)) malformed(line_, "invalid attribute in <" + qname);
    const std::size_t a0 = pos_;
    while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
    const std::string aname(text_.substr(a0, pos_ - a0));
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != '=') malformed(line_, "attribute " + aname + " has no value");
    ++pos_;
    skip_ws();
    if (pos_ >= text_.size() || (text_[pos_] != '"' && text_[pos_] != '\'')) {
      malformed(line_, "attribute " + aname + " value must be quoted");
    }
    const char quote = text_[pos_++];
    const std::size_t close = text_.find(quote, pos_);
    if (close == std::string_view::npos) malformed(line_, "unterminated attribute value");
    const std::string_view raw = text_.substr(pos_, close - pos_);
    if (raw.find('<') != std::string_view::npos) malformed(line_, "'<' in attribute value");
    line_ += static_cast<int>(std::count(raw.begin(), raw.end(), '\n'));
    pos_ = close + 1;
    for (const auto& [existing, _] : ev.attributes) {
      if (existing == local_name(aname) && aname.find("xmlns") != 0) malformed(tag_line, "duplicate attribute " + aname);
    }
    ev.attributes.emplace_back(local_name(aname), decode_entities(raw, line_));
  }

  open_.push_back(qname);
  seen_root_ = true;
  ev.kind = EventKind::start_element;
  return ev;
}

const Element* Element::child(std::string_view local) const {
  for (const auto& c : children) {
    if (c.name == local) return &c;
  }
  return nullptr;
}

std::vector<const Element*> Element::children_named(std::string_view local) const {
  std::vector<const Element*> out;
  for (const auto& c : children) {
    if (c.name == local) out.push_back(&c);
  }
  return out;
}

const std::string* Element::child_text(std::string_view local) const {
  const Element* c = child(local);
  return c ? &c->text : nullptr;
}

const std::string* Element::attribute(std::string_view local) const {
  for (const auto& [k, v] : attributes) {
    if (k == local) return &v;
  }
  return nullptr;
}

Element parse_tree(std::string_view text) {
  Reader reader(text);
  std::vector<Element> stack;
  std::vector<std::string> raw_text;
  Element root;
  for (;;) {
    Event ev = reader.next();
    switch (ev.kind) {
      case EventKind::start_element: {
        Element e;
        e.name = std::move(ev.name);
        e.attributes = std::move(ev.attributes);
        e.line = ev.line;
        stack.push_back(std::move(e));
        raw_text.emplace_back();
        break;
      }
      case EventKind::text:
        if (!raw_text.empty()) raw_text.back() += ev.text;
        break;
      case EventKind::end_element: {
        Element done = std::move(stack.back());
        stack.pop_back();
        done.text = trim(raw_text.back());
        raw_text.pop_back();
        if (stack.empty()) {
          root = std::move(done);
        } else {
          stack.back().children.push_back(std::move(done));
        }
        break;
      }
      case EventKind::end_document:
        return root;
    }
  }
}

}  // namespace lunarkit::xml
