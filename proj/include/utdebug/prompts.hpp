// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "utdebug/core.hpp"
#include "utdebug/gateway.hpp"

namespace utdebug::prompts {

enum class TemplateName {
  utgen_failing,
  random_ut_input,
  no_ut_feedback,
  ut_feedback,
  corruption,
  rationalization,
  code_fix,
};

/// A template slot had no binding.
class RenderError : public Error {
 public:
  using Error::Error;
};

using Bindings = std::map<std::string, std::string, std::less<>>;

std::string_view to_string(TemplateName name);
TemplateName template_from_string(std::string_view s);

/// Raw template body with `{slot}` placeholders, as shipped in templates/.
std::string_view body(TemplateName name);

/// Slot names in order of first appearance.
std::vector<std::string> slots(TemplateName name);

/// Fills every slot. Unused bindings are ignored; a missing one throws
/// RenderError naming the slot.
std::string render_text(TemplateName name, const Bindings& bindings);

/// Single user message holding the rendered template.
std::vector<Message> render(TemplateName name, const Bindings& bindings);

/// Wraps source in a ```python fence.
std::string fence(std::string_view code);

/// Standard bindings for a problem and a code text.
Bindings problem_bindings(const Problem& p, std::string_view code);

struct ParsedUtResponse {
  std::optional<std::string> hypothesis;
  std::optional<std::string> error_pattern;
  std::vector<std::string> args;
  std::optional<std::string> output;
  std::string raw;
};

/// Recovers a unit test from a completion. The last `Arguments:` and last
/// `Output:` lines win. Throws ParseError when there is no Arguments line,
/// brackets are unbalanced or the call names another function.
ParsedUtResponse parse_unit_test(std::string_view completion, std::string_view entry_point);

/// Value of the last `Output:` line, with optional backtick, bold or angle
/// bracket wrappers removed. Spans lines while brackets are open.
std::optional<std::string> extract_output(std::string_view completion);

/// Last fenced block, else the text from the first `def <entry_point>` to
/// the end. Throws ParseError when neither exists.
CandidateCode parse_code_block(std::string_view completion, std::string_view entry_point = {});

enum class Verdict { correct, wrong, unknown };

/// Which sentinel sentence ends the critique (the later one wins).
Verdict critique_verdict(std::string_view completion);

/// True iff the "code is correct" sentinel decides the critique.
bool is_declared_correct(std::string_view completion);

/// Text under the last `### Reasoning` header, or the whole completion.
std::string extract_rationale(std::string_view completion);

inline constexpr std::string_view kCorrectSentinel = "The above code is correct.";
inline constexpr std::string_view kWrongSentinel = "The above code is wrong, please fix it.";

}  // namespace utdebug::prompts
