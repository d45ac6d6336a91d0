// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#include "utdebug/core.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "utdebug/literal.hpp"

namespace utdebug {

std::string_view engine_version() { return UTDEBUG_VERSION; }

std::string_view to_string(Origin o) {
  switch (o) {
    case Origin::generated_random: return "generated_random";
    case Origin::generated_prompted: return "generated_prompted";
    case Origin::generated_utgen: return "generated_utgen";
    case Origin::gold: return "gold";
    case Origin::oracle: return "oracle";
  }
  return "gold";
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::human_bug: return "human_bug";
    case Provenance::sampled_model: return "sampled_model";
    case Provenance::perturbed: return "perturbed";
    case Provenance::edited_round_k: return "edited_round_k";
  }
  return "sampled_model";
}

std::string_view to_string(ValueKind k) {
  switch (k) {
    case ValueKind::scalar: return "scalar";
    case ValueKind::sequence: return "sequence";
    case ValueKind::mapping: return "mapping";
    case ValueKind::set: return "set";
    case ValueKind::none: return "none";
    case ValueKind::other: return "other";
  }
  return "other";
}

Origin origin_from_string(std::string_view s) {
  for (auto o : {Origin::generated_random, Origin::generated_prompted, Origin::generated_utgen,
                 Origin::gold, Origin::oracle}) {
    if (to_string(o) == s) return o;
  }
  throw ConfigError("unknown test origin: " + std::string(s));
}

Provenance provenance_from_string(std::string_view s) {
  for (auto p : {Provenance::human_bug, Provenance::sampled_model, Provenance::perturbed,
                 Provenance::edited_round_k}) {
    if (to_string(p) == s) return p;
  }
  throw ConfigError("unknown code provenance: " + std::string(s));
}

ValueKind infer_kind(std::string_view literal) {
  const auto t = literal::trim(literal);
  if (t.empty()) return ValueKind::other;
  if (t == "None") return ValueKind::none;
  if (t.front() == '[' || t.front() == '(') return ValueKind::sequence;
  if (t == "set()" || t.rfind("frozenset(", 0) == 0) return ValueKind::set;
  if (t.front() == '{') {
    // `{}` is an empty dict; otherwise a top-level colon marks a mapping.
    if (t == "{}") return ValueKind::mapping;
    const auto inner = t.substr(1, t.size() >= 2 ? t.size() - 2 : 0);
    int depth = 0;
    char quote = 0;
    for (std::size_t i = 0; i < inner.size(); ++i) {
      const char c = inner[i];
      if (quote) {
        if (c == '\\') ++i;
        else if (c == quote) quote = 0;
        continue;
      }
      if (c == '\'' || c == '"') quote = c;
      else if (c == '(' || c == '[' || c == '{') ++depth;
      else if (c == ')' || c == ']' || c == '}') --depth;
      else if (c == ':' && depth == 0) return ValueKind::mapping;
    }
    return ValueKind::set;
  }
  if (t.front() == '<') return ValueKind::other;
  return ValueKind::scalar;
}

CanonValue CanonValue::from_text(std::string text) {
  const auto kind = infer_kind(text);
  return {std::move(text), kind};
}

void validate(const Problem& p) {
  if (p.id.empty()) throw ConfigError("problem without id");
  const auto& ep = p.entry_point;
  const bool ident = !ep.empty() && !std::isdigit(static_cast<unsigned char>(ep.front())) &&
                     std::all_of(ep.begin(), ep.end(), [](char c) {
                       return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
                     });
  if (!ident) throw ConfigError("problem " + p.id + ": entry_point is not an identifier");
  if (p.signature.find(ep) == std::string::npos) {
    throw ConfigError("problem " + p.id + ": entry_point does not appear in signature");
  }
  if (p.gold_tests && p.gold_tests->empty()) {
    throw ConfigError("problem " + p.id + ": gold_tests present but empty");
  }
  for (const auto& c : p.candidates) {
    if (c.source.empty()) throw ConfigError("problem " + p.id + ": empty candidate source");
  }
}

std::string join_args(const std::vector<std::string>& args) {
  std::string out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += args[i];
  }
  return out;
}

std::string render_unit_test(const UnitTest& ut, std::string_view entry_point) {
  std::string out = "Arguments: ";
  out += entry_point;
  out += '(';
  out += join_args(ut.args);
  out += ")\nOutput: ";
  out += ut.expected.text;
  return out;
}

std::string dedup_key(const UnitTest& ut) {
  std::string key;
  for (const auto& a : ut.args) {
    key += literal::normalize(a);
    key += '\x1f';
  }
  key += '\x1e';
  key += literal::normalize(ut.expected.text);
  return key;
}

std::vector<UnitTest> dedup(std::vector<UnitTest> suite) {
  std::unordered_set<std::string> seen;
  std::vector<UnitTest> out;
  out.reserve(suite.size());
  for (auto& ut : suite) {
    if (seen.insert(dedup_key(ut)).second) out.push_back(std::move(ut));
  }
  return out;
}

}  // namespace utdebug
