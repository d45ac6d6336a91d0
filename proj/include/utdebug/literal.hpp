// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Lexical helpers over subject-language literal text. Literals stay opaque
// source text; these functions only understand quotes and bracket nesting.
namespace utdebug::literal {

std::string_view trim(std::string_view s);

/// Collapses whitespace outside string literals. A run of whitespace is
/// dropped unless it separates two identifier characters, in which case a
/// single space survives (`not x`, `1 if y else 2`).
std::string normalize(std::string_view text);

/// Splits on top-level commas, never inside (), [], {}, '', "" (including
/// triple-quoted strings). Pieces are trimmed; one trailing empty piece
/// (`1, 2,`) is dropped. Throws ParseError on unbalanced nesting or an
/// unterminated string.
std::vector<std::string> split_top_level(std::string_view text);

/// Index of the bracket closing the one at `open`, or nullopt.
std::optional<std::size_t> matching_close(std::string_view text, std::size_t open);

/// True when a numeric token with a fractional part or exponent (or the
/// words inf, nan, float) appears outside string literals.
bool contains_float(std::string_view text);

/// First position of `token` outside string literals and brackets.
std::optional<std::size_t> find_top_level(std::string_view text, std::string_view token);

/// True when brackets and quotes are balanced.
bool balanced(std::string_view text);

}  // namespace utdebug::literal
