// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#include "utdebug/prompts.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "templates_data.hpp"
#include "utdebug/literal.hpp"

namespace utdebug::prompts {

namespace {

constexpr std::array kNames = {"utgen_failing", "random_ut_input", "no_ut_feedback", "ut_feedback",
                               "corruption",    "rationalization", "code_fix"};

bool slot_char(char c) { return std::islower(static_cast<unsigned char>(c)) || c == '_'; }

// Calls fn(slot, begin, end) for each `{slot}` occurrence.
template <typename Fn>
void for_each_slot(std::string_view text, Fn&& fn) {
  std::size_t i = 0;
  while ((i = text.find('{', i)) != std::string_view::npos) {
    std::size_t j = i + 1;
    while (j < text.size() && slot_char(text[j])) ++j;
    if (j > i + 1 && j < text.size() && text[j] == '}') {
      fn(text.substr(i + 1, j - i - 1), i, j + 1);
      i = j + 1;
    } else {
      ++i;
    }
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

// Offset of the last line whose content (after list/bold markup) starts
// with `label`; returns the offset just past the label.
std::optional<std::size_t> last_labelled(std::string_view text, std::string_view label) {
  std::optional<std::size_t> found;
  std::size_t offset = 0;
  for (auto line : lines_of(text)) {
    std::size_t k = 0;
    while (k < line.size() && (line[k] == ' ' || line[k] == '\t' || line[k] == '-' || line[k] == '*' ||
                               line[k] == '#' || line[k] == '>')) {
      ++k;
    }
    if (line.substr(k, label.size()) == label) {
      std::size_t after = k + label.size();
      // `**Output:**` style
      while (after < line.size() && line[after] == '*') ++after;
      found = offset + after;
    }
    offset += line.size() + 1;
  }
  return found;
}

std::string_view strip_wrappers(std::string_view v) {
  for (bool changed = true; changed;) {
    changed = false;
    v = literal::trim(v);
    for (std::string_view w : {"```", "**", "`"}) {
      if (v.size() >= 2 * w.size() && v.substr(0, w.size()) == w && v.substr(v.size() - w.size()) == w) {
        v = v.substr(w.size(), v.size() - 2 * w.size());
        changed = true;
        break;
      }
    }
    // `< 131 >` echoes the template placeholder. Canonical `<TypeName>`
    // values start with a letter and are left alone.
    if (!changed && v.size() >= 3 && v.front() == '<' && v.back() == '>') {
      const auto inner = literal::trim(v.substr(1, v.size() - 2));
      const char c = inner.empty() ? 'x' : inner.front();
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '\'' || c == '"' || c == '[' ||
          c == '(' || c == '{') {
        v = inner;
        changed = true;
      }
    }
  }
  return v;
}

// From `start`, takes the value on the current line, extending past line
// ends while brackets or quotes remain open.
std::string_view value_from(std::string_view text, std::size_t start) {
  auto rest = text.substr(start);
  const auto nl = rest.find('\n');
  auto line = rest.substr(0, nl);
  const auto lead = literal::trim(line);
  if (!lead.empty() && (lead.front() == '[' || lead.front() == '(' || lead.front() == '{') &&
      !literal::balanced(lead)) {
    const auto open = rest.find(lead.front());
    if (auto close = literal::matching_close(rest, open)) return rest.substr(0, *close + 1);
  }
  return line;
}

}  // namespace

std::string_view to_string(TemplateName name) { return kNames[static_cast<std::size_t>(name)]; }

TemplateName template_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (s == kNames[i]) return static_cast<TemplateName>(i);
  }
  throw ConfigError("unknown template: " + std::string(s));
}

std::string_view body(TemplateName name) { return detail::template_body(to_string(name)); }

std::vector<std::string> slots(TemplateName name) {
  std::vector<std::string> out;
  for_each_slot(body(name), [&](std::string_view slot, std::size_t, std::size_t) {
    if (std::find(out.begin(), out.end(), slot) == out.end()) out.emplace_back(slot);
  });
  return out;
}

std::string render_text(TemplateName name, const Bindings& bindings) {
  const auto text = body(name);
  std::string out;
  out.reserve(text.size() + 256);
  std::size_t copied = 0;
  for_each_slot(text, [&](std::string_view slot, std::size_t begin, std::size_t end) {
    const auto it = bindings.find(slot);
    if (it == bindings.end()) {
      throw RenderError("template " + std::string(to_string(name)) + ": missing binding for slot {" +
                        std::string(slot) + "}");
    }
    out.append(text.substr(copied, begin - copied));
    out += it->second;
    copied = end;
  });
  out.append(text.substr(copied));
  return out;
}

std::vector<Message> render(TemplateName name, const Bindings& bindings) {
  return {Message{"user", render_text(name, bindings)}};
}

std::string fence(std::string_view code) {
  std::string out = "```python\n";
  out += code;
  if (!code.empty() && code.back() != '\n') out += '\n';
  out += "```";
  return out;
}

Bindings problem_bindings(const Problem& p, std::string_view code) {
  return {
      {"signature", p.signature},
      {"description", p.description},
      {"entry_point", p.entry_point},
      {"code", fence(code)},
  };
}

std::optional<std::string> extract_output(std::string_view completion) {
  const auto at = last_labelled(completion, "Output:");
  if (!at) return std::nullopt;
  auto v = strip_wrappers(value_from(completion, *at));
  if (v.empty()) return std::nullopt;
  return std::string(v);
}

ParsedUtResponse parse_unit_test(std::string_view completion, std::string_view entry_point) {
  ParsedUtResponse r;
  r.raw = std::string(completion);

  const auto at = last_labelled(completion, "Arguments:");
  if (!at) throw ParseError("no Arguments line");
  auto rest = completion.substr(*at);
  // Skip whitespace and opening backticks/bold before the call.
  std::size_t k = 0;
  while (k < rest.size() && (rest[k] == ' ' || rest[k] == '\t' || rest[k] == '`' || rest[k] == '*')) ++k;
  rest = rest.substr(k);
  std::size_t name_end = 0;
  while (name_end < rest.size() &&
         (std::isalnum(static_cast<unsigned char>(rest[name_end])) || rest[name_end] == '_' || rest[name_end] == '.')) {
    ++name_end;
  }
  const auto name = rest.substr(0, name_end);
  std::size_t paren = name_end;
  while (paren < rest.size() && rest[paren] == ' ') ++paren;
  if (name.empty() || paren >= rest.size() || rest[paren] != '(') throw ParseError("Arguments line is not a call");
  if (name != entry_point) {
    throw ParseError("Arguments call names '" + std::string(name) + "', expected '" + std::string(entry_point) + "'");
  }
  const auto close = literal::matching_close(rest, paren);
  if (!close) throw ParseError("unbalanced brackets in Arguments");
  r.args = literal::split_top_level(rest.substr(paren + 1, *close - paren - 1));

  r.output = extract_output(completion);
  if (const auto ep = last_labelled(completion, "Error Pattern:")) {
    auto line = value_from(completion, *ep);
    if (!literal::trim(line).empty()) r.error_pattern = std::string(literal::trim(line));
  }
  if (const auto h = completion.find("## Hypothesis"); h != std::string_view::npos) {
    auto start = h + std::string_view("## Hypothesis").size();
    auto stop = completion.find("Error Pattern:", start);
    if (stop == std::string_view::npos) stop = completion.find("## Unit Test", start);
    auto text = literal::trim(completion.substr(start, stop == std::string_view::npos ? std::string_view::npos : stop - start));
    if (!text.empty()) r.hypothesis = std::string(text);
  }
  return r;
}

CandidateCode parse_code_block(std::string_view completion, std::string_view entry_point) {
  // Fence lines are lines starting with ```; pair them up in order.
  std::vector<std::pair<std::size_t, std::size_t>> blocks;  // body [begin, end)
  std::optional<std::size_t> open_body;
  std::size_t offset = 0;
  for (auto line : lines_of(completion)) {
    const auto t = literal::trim(line);
    if (t.substr(0, 3) == "```") {
      if (!open_body) {
        open_body = offset + line.size() + 1;
      } else {
        blocks.emplace_back(*open_body, offset);
        open_body.reset();
      }
    }
    offset += line.size() + 1;
  }
  if (!blocks.empty()) {
    const auto [b, e] = blocks.back();
    auto code = std::string(completion.substr(b, e > b ? e - b : 0));
    if (literal::trim(code).empty()) throw ParseError("empty code block");
    return {std::move(code), Provenance::sampled_model, std::nullopt};
  }
  if (!entry_point.empty()) {
    const auto pattern = "def " + std::string(entry_point);
    auto pos = completion.find(pattern);
    while (pos != std::string_view::npos && pos > 0 && completion[pos - 1] != '\n') {
      pos = completion.find(pattern, pos + 1);
    }
    if (pos != std::string_view::npos) {
      std::string code(completion.substr(pos));
      if (code.back() != '\n') code += '\n';
      return {std::move(code), Provenance::sampled_model, std::nullopt};
    }
  }
  throw ParseError("no code found in completion");
}

Verdict critique_verdict(std::string_view completion) {
  const auto c = completion.rfind(kCorrectSentinel);
  const auto w = completion.rfind(kWrongSentinel);
  if (c == std::string_view::npos && w == std::string_view::npos) return Verdict::unknown;
  if (w == std::string_view::npos) return Verdict::correct;
  if (c == std::string_view::npos) return Verdict::wrong;
  return c > w ? Verdict::correct : Verdict::wrong;
}

bool is_declared_correct(std::string_view completion) { return critique_verdict(completion) == Verdict::correct; }

std::string extract_rationale(std::string_view completion) {
  const auto h = completion.rfind("### Reasoning");
  if (h == std::string_view::npos) return std::string(literal::trim(completion));
  return std::string(literal::trim(completion.substr(h + std::string_view("### Reasoning").size())));
}

}  // namespace utdebug::prompts
