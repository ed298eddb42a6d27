#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tablenet::html {

enum class TokenKind { start_tag, end_tag, text };

struct Attribute {
  std::string name;
  std::string value;
};

struct Token {
  TokenKind kind = TokenKind::text;
  std::string name;  // lowercased tag name; empty for text
  std::vector<Attribute> attributes;
  bool self_closing = false;
  std::string text;  // raw (undecoded) text for text tokens
  std::size_t offset = 0;
  std::size_t length = 0;

  std::optional<std::string_view> attribute(std::string_view key) const {
    for (const auto& a : attributes) {
      if (a.name == key) return std::string_view(a.value);
    }
    return std::nullopt;
  }
};

namespace detail {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
}

inline char lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

inline bool starts_with_ci(std::string_view text, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > text.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (lower(text[pos + i]) != lower(prefix[i])) return false;
  }
  return true;
}

inline bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':';
}

}  // namespace detail

inline bool is_void_element(std::string_view name) {
  static constexpr std::string_view kVoid[] = {"area", "base", "br",   "col",  "embed",
                                               "hr",   "img",  "input", "link", "meta",
                                               "source", "track", "wbr"};
  return std::find(std::begin(kVoid), std::end(kVoid), name) != std::end(kVoid);
}

// Splits markup into start tags, end tags and text. Comments, doctypes and
// processing instructions are dropped; the contents of <style>/<script> are
// emitted as a single text token.
inline std::vector<Token> tokenize(std::string_view src) {
  using namespace detail;
  std::vector<Token> out;
  std::size_t i = 0;
  std::size_t text_start = 0;

  auto flush_text = [&](std::size_t end) {
    if (end > text_start) {
      Token t;
      t.kind = TokenKind::text;
      t.text = std::string(src.substr(text_start, end - text_start));
      t.offset = text_start;
      t.length = end - text_start;
      out.push_back(std::move(t));
    }
  };

  while (i < src.size()) {
    if (src[i] != '<') {
      ++i;
      continue;
    }
    if (starts_with_ci(src, i, "<!--")) {
      flush_text(i);
      const auto end = src.find("-->", i + 4);
      i = end == std::string_view::npos ? src.size() : end + 3;
      text_start = i;
      continue;
    }
    if (i + 1 < src.size() && (src[i + 1] == '!' || src[i + 1] == '?')) {
      flush_text(i);
      const auto end = src.find('>', i);
      i = end == std::string_view::npos ? src.size() : end + 1;
      text_start = i;
      continue;
    }
    const bool closing = i + 1 < src.size() && src[i + 1] == '/';
    const std::size_t name_pos = i + (closing ? 2 : 1);
    if (name_pos >= src.size() || !std::isalpha(static_cast<unsigned char>(src[name_pos]))) {
      ++i;  // a bare '<' is text
      continue;
    }
    flush_text(i);
    Token tag;
    tag.kind = closing ? TokenKind::end_tag : TokenKind::start_tag;
    tag.offset = i;
    std::size_t p = name_pos;
    while (p < src.size() && is_name_char(src[p])) tag.name.push_back(lower(src[p++]));

    // attributes
    while (p < src.size() && src[p] != '>') {
      if (is_space(src[p])) {
        ++p;
        continue;
      }
      if (src[p] == '/') {
        tag.self_closing = true;
        ++p;
        continue;
      }
      tag.self_closing = false;
      Attribute attr;
      while (p < src.size() && !is_space(src[p]) && src[p] != '=' && src[p] != '>' &&
             src[p] != '/') {
        attr.name.push_back(lower(src[p++]));
      }
      while (p < src.size() && is_space(src[p])) ++p;
      if (p < src.size() && src[p] == '=') {
        ++p;
        while (p < src.size() && is_space(src[p])) ++p;
        if (p < src.size() && (src[p] == '"' || src[p] == '\'')) {
          const char quote = src[p++];
          const auto end = src.find(quote, p);
          const std::size_t stop = end == std::string_view::npos ? src.size() : end;
          attr.value = std::string(src.substr(p, stop - p));
          p = stop == src.size() ? stop : stop + 1;
        } else {
          while (p < src.size() && !is_space(src[p]) && src[p] != '>') {
            attr.value.push_back(src[p++]);
          }
        }
      }
      if (attr.name.empty()) {
        ++p;
        continue;
      }
      tag.attributes.push_back(std::move(attr));
    }
    i = p < src.size() ? p + 1 : src.size();
    tag.length = i - tag.offset;
    const bool raw = tag.kind == TokenKind::start_tag && !tag.self_closing &&
                     (tag.name == "style" || tag.name == "script");
    const std::string raw_name = tag.name;
    out.push_back(std::move(tag));
    text_start = i;

    if (raw) {
      std::size_t end = i;
      while (end < src.size() && !starts_with_ci(src, end, "</" + raw_name)) ++end;
      if (end > i) {
        Token body;
        body.kind = TokenKind::text;
        body.text = std::string(src.substr(i, end - i));
        body.offset = i;
        body.length = end - i;
        out.push_back(std::move(body));
      }
      i = end;
      text_start = i;
    }
  }
  flush_text(src.size());
  return out;
}

// Decodes only the five XML-predefined entities; anything else is kept verbatim.
inline std::string decode_entities(std::string_view text) {
  struct Entity {
    std::string_view name;
    char value;
  };
  static constexpr Entity kEntities[] = {
      {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}};
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    bool matched = false;
    if (text[i] == '&') {
      for (const auto& e : kEntities) {
        if (text.substr(i, e.name.size()) == e.name) {
          out.push_back(e.value);
          i += e.name.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out.push_back(text[i++]);
  }
  return out;
}

inline std::string escape_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Collapses runs of ASCII whitespace to one space and trims both ends.
inline std::string normalize_space(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending = false;
  for (char c : text) {
    if (detail::is_space(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

inline bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(), detail::is_space);
}

}  // namespace tablenet::html
