// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#include "utdebug/literal.hpp"

#include <cctype>

#include "utdebug/core.hpp"

namespace utdebug::literal {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_ident(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

// Returns the index one past the string literal starting at `i`, or npos
// when unterminated.
std::size_t skip_string(std::string_view s, std::size_t i) {
  const char q = s[i];
  const bool triple = i + 2 < s.size() && s[i + 1] == q && s[i + 2] == q;
  std::size_t j = i + (triple ? 3 : 1);
  while (j < s.size()) {
    if (s[j] == '\\') {
      j += 2;
      continue;
    }
    if (s[j] == q) {
      if (!triple) return j + 1;
      if (j + 2 < s.size() && s[j + 1] == q && s[j + 2] == q) return j + 3;
    }
    if (!triple && s[j] == '\n') return std::string_view::npos;
    ++j;
  }
  return std::string_view::npos;
}

char closer_of(char c) {
  switch (c) {
    case '(': return ')';
    case '[': return ']';
    case '{': return '}';
    default: return '\0';
  }
}

}  // namespace

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string normalize(std::string_view text) {
  text = trim(text);
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\'' || c == '"') {
      const std::size_t end = skip_string(text, i);
      const std::size_t stop = end == std::string_view::npos ? text.size() : end;
      out.append(text.substr(i, stop - i));
      i = stop;
      continue;
    }
    if (is_space(c)) {
      std::size_t j = i;
      while (j < text.size() && is_space(text[j])) ++j;
      if (!out.empty() && j < text.size() && is_ident(out.back()) && is_ident(text[j])) {
        out.push_back(' ');
      }
      i = j;
      continue;
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

std::optional<std::size_t> matching_close(std::string_view text, std::size_t open) {
  if (open >= text.size() || closer_of(text[open]) == '\0') return std::nullopt;
  std::vector<char> stack;
  std::size_t i = open;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\'' || c == '"') {
      const std::size_t end = skip_string(text, i);
      if (end == std::string_view::npos) return std::nullopt;
      i = end;
      continue;
    }
    if (const char close = closer_of(c); close != '\0') {
      stack.push_back(close);
    } else if (c == ')' || c == ']' || c == '}') {
      if (stack.empty() || stack.back() != c) return std::nullopt;
      stack.pop_back();
      if (stack.empty()) return i;
    }
    ++i;
  }
  return std::nullopt;
}

std::vector<std::string> split_top_level(std::string_view text) {
  std::vector<std::string> pieces;
  std::vector<char> stack;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\'' || c == '"') {
      const std::size_t end = skip_string(text, i);
      if (end == std::string_view::npos) throw ParseError("unterminated string literal");
      i = end;
      continue;
    }
    if (const char close = closer_of(c); close != '\0') {
      stack.push_back(close);
    } else if (c == ')' || c == ']' || c == '}') {
      if (stack.empty() || stack.back() != c) throw ParseError("unbalanced brackets");
      stack.pop_back();
    } else if (c == ',' && stack.empty()) {
      pieces.emplace_back(trim(text.substr(start, i - start)));
      start = i + 1;
    }
    ++i;
  }
  if (!stack.empty()) throw ParseError("unbalanced brackets");
  // `a, b,` keeps two pieces; `,` and `a,,b` are rejected below.
  if (const auto last = trim(text.substr(start)); !last.empty()) pieces.emplace_back(last);
  for (const auto& p : pieces) {
    if (p.empty()) throw ParseError("empty argument");
  }
  return pieces;
}

std::optional<std::size_t> find_top_level(std::string_view text, std::string_view token) {
  int depth = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\'' || c == '"') {
      const std::size_t end = skip_string(text, i);
      if (end == std::string_view::npos) return std::nullopt;
      i = end;
      continue;
    }
    if (depth == 0 && text.substr(i, token.size()) == token) return i;
    if (closer_of(c) != '\0') {
      ++depth;
    } else if ((c == ')' || c == ']' || c == '}') && depth > 0) {
      --depth;
    }
    ++i;
  }
  return std::nullopt;
}

bool balanced(std::string_view text) {
  try {
    split_top_level(text);
    return true;
  } catch (const ParseError&) {
    return false;
  }
}

bool contains_float(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\'' || c == '"') {
      const std::size_t end = skip_string(text, i);
      if (end == std::string_view::npos) return false;
      i = end;
      continue;
    }
    if (is_ident(c) && !std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && is_ident(text[j])) ++j;
      const auto word = text.substr(i, j - i);
      if (word == "inf" || word == "nan" || word == "float") return true;
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < text.size() &&
                                                        std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      std::size_t j = i;
      bool is_float = false;
      if (c == '0' && j + 1 < text.size() && std::isalpha(static_cast<unsigned char>(text[j + 1])) &&
          text[j + 1] != 'e' && text[j + 1] != 'E') {
        // 0x.., 0o.., 0b.. integer prefixes
        while (j < text.size() && is_ident(text[j])) ++j;
        i = j;
        continue;
      }
      while (j < text.size()) {
        const char d = text[j];
        if (std::isdigit(static_cast<unsigned char>(d)) || d == '_') {
          ++j;
        } else if (d == '.') {
          is_float = true;
          ++j;
        } else if ((d == 'e' || d == 'E') && j + 1 < text.size() &&
                   (std::isdigit(static_cast<unsigned char>(text[j + 1])) || text[j + 1] == '-' ||
                    text[j + 1] == '+')) {
          is_float = true;
          j += 2;
        } else {
          break;
        }
      }
      if (is_float) return true;
      i = j;
      continue;
    }
    ++i;
  }
  return false;
}

}  // namespace utdebug::literal
