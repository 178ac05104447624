#pragma once

// Minimal pull-style XML reader for PDS4 labels. Element and attribute names
// are reported by local name (namespace prefix dropped). Supports the XML
// declaration, processing instructions, comments, DOCTYPE (skipped), CDATA,
// the five predefined entities and numeric character references. No DTD or
// schema processing.

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lunarkit::xml {

enum class EventKind { start_element, end_element, text, end_document };

struct Event {
  EventKind kind = EventKind::end_document;
  std::string name;  // local name for element events
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;  // decoded character data for text events
  int line = 1;
};

class Reader {
 public:
  explicit Reader(std::string_view text);

  // Throws Error{XmlMalformed} with the line number.
  Event next();

 private:
  Event read_tag();
  Event read_text();
  void skip_misc();
  std::string decode_entities(std::string_view raw, int line) const;

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::vector<std::string> open_;  // qualified names of open elements
  bool seen_root_ = false;
  bool pending_end_ = false;  // self-closing tag emits its end next
  std::string pending_name_;
};

struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;  // concatenated direct character data, whitespace-trimmed
  std::vector<Element> children;
  int line = 1;

  const Element* child(std::string_view local_name) const;
  std::vector<const Element*> children_named(std::string_view local_name) const;
  // Text of the first child with the given name, if any.
  const std::string* child_text(std::string_view local_name) const;
  const std::string* attribute(std::string_view local_name) const;
};

// Builds an element tree from the event stream.
Element parse_tree(std::string_view text);

}  // namespace lunarkit::xml
