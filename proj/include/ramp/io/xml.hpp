#pragma once

// Thin strict wrapper over the rapidxml parser bundled with Boost.PropertyTree.
// Produces a small owned element tree with source positions so schema checks
// can report line/column.

#include <boost/property_tree/detail/rapidxml.hpp>

#include <algorithm>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ramp/error.hpp"

namespace ramp::io {

struct SourcePos {
  int line = 1;
  int column = 1;
};

inline std::string to_string(const SourcePos& p) {
  return std::to_string(p.line) + ":" + std::to_string(p.column);
}

struct XmlElement {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<XmlElement> children;
  SourcePos pos;

  const std::string* attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes)
      if (k == key) return &v;
    return nullptr;
  }
};

namespace detail {

inline SourcePos position_of(const std::string& text, std::size_t offset) {
  SourcePos p;
  offset = std::min(offset, text.size());
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++p.line;
      p.column = 1;
    } else {
      ++p.column;
    }
  }
  return p;
}

namespace rx = boost::property_tree::detail::rapidxml;

inline bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
  });
}

// The in-situ buffer keeps byte offsets identical to the source text, so a
// pointer into it maps straight back to a line/column.
inline XmlElement convert(const rx::xml_node<char>* node, const std::string& text,
                          const char* base) {
  XmlElement el;
  el.name.assign(node->name(), node->name_size());
  el.pos = position_of(text, static_cast<std::size_t>(node->name() - base));
  for (auto* a = node->first_attribute(); a != nullptr; a = a->next_attribute()) {
    std::string key(a->name(), a->name_size());
    for (const auto& existing : el.attributes) {
      if (existing.first == key) {
        throw Error(ErrorCode::ParseError,
                    to_string(position_of(text, static_cast<std::size_t>(a->name() - base))) +
                        ": duplicate attribute '" + key + "'");
      }
    }
    el.attributes.emplace_back(std::move(key), std::string(a->value(), a->value_size()));
  }
  for (auto* c = node->first_node(); c != nullptr; c = c->next_sibling()) {
    switch (c->type()) {
      case rx::node_element:
        el.children.push_back(convert(c, text, base));
        break;
      case rx::node_data:
      case rx::node_cdata:
        if (!is_blank(std::string_view(c->value(), c->value_size()))) {
          throw Error(ErrorCode::SchemaError,
                      to_string(position_of(text, static_cast<std::size_t>(c->value() - base))) +
                          ": unexpected text inside <" + el.name + ">");
        }
        break;
      default:
        break;
    }
  }
  return el;
}

}  // namespace detail

/// Parses a well-formed XML document and returns its root element.
/// Malformed input raises PARSE_ERROR with the line/column of the fault.
inline XmlElement parse_xml(const std::string& text) {
  namespace rx = detail::rx;
  std::vector<char> buffer(text.begin(), text.end());
  buffer.push_back('\0');
  rx::xml_document<char> doc;
  try {
    doc.parse<rx::parse_validate_closing_tags | rx::parse_declaration_node>(buffer.data());
  } catch (const rx::parse_error& e) {
    const char* where = e.where<char>();
    std::size_t offset = where ? static_cast<std::size_t>(where - buffer.data()) : 0;
    throw Error(ErrorCode::ParseError,
                to_string(detail::position_of(text, offset)) + ": " + e.what());
  }
  const rx::xml_node<char>* root = nullptr;
  for (auto* n = doc.first_node(); n != nullptr; n = n->next_sibling()) {
    if (n->type() == rx::node_element) {
      if (root != nullptr) {
        throw Error(ErrorCode::ParseError,
                    to_string(detail::position_of(text, static_cast<std::size_t>(n->name() - buffer.data()))) +
                        ": more than one root element");
      }
      root = n;
    } else if (n->type() == rx::node_data &&
               !detail::is_blank(std::string_view(n->value(), n->value_size()))) {
      throw Error(ErrorCode::ParseError, "text outside the root element");
    }
  }
  if (root == nullptr) throw Error(ErrorCode::ParseError, "1:1: document has no root element");
  return detail::convert(root, text, buffer.data());
}

/// Escapes the five XML special characters for attribute values.
inline std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace ramp::io
