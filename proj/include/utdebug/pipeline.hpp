// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "utdebug/core.hpp"
#include "utdebug/gateway.hpp"
#include "utdebug/runner.hpp"

namespace utdebug {

/// Whitespace-separated token count.
std::size_t whitespace_tokens(std::string_view text);

struct SourceFilter {
  std::vector<std::string> require_keywords{"python", "def "};
  std::size_t max_prompt_tokens = 2000;
  bool require_clean_execution = true;

  void validate() const;
  /// Why the item is rejected, or nullopt when it passes. Keywords and the
  /// token budget apply to the description and signature together.
  std::optional<std::string> reject_reason(const Problem& item, const SubjectRunner& runner) const;
};

struct BootstrapConfig {
  SourceFilter filter;
  int corruptions = 2;
  int input_attempts = 5;
  double temperature = 0.7;
  double top_p = 0.9;
  std::string model;
  int jobs = 1;
};

struct ItemError {
  std::string problem_id;
  std::string message;
};

struct BootstrapResult {
  std::vector<SftRecord> records;
  std::size_t items = 0;
  std::size_t filtered = 0;
  std::size_t dropped_no_ut = 0;
  std::vector<ItemError> errors;
};

/// Corrupt, attack, rationalize. Records come out in source order. Every
/// record is re-verified at the end; any failure throws Error.
BootstrapResult bootstrap_sft(const std::vector<Problem>& source, Gateway& gateway, const SubjectRunner& runner,
                              const BootstrapConfig& cfg = {});

struct VerifyReport {
  std::size_t checked = 0;
  std::size_t passed = 0;
  std::vector<std::string> failures;
  bool ok() const { return passed == checked; }
};

/// Checks that each record's test fails on its buggy code and that its
/// expected value is the reference output.
VerifyReport verify_sft(const std::vector<SftRecord>& records, const std::vector<Problem>& source,
                        const SubjectRunner& runner);

enum class SplitKind { fix, fix_hard };

std::string_view to_string(SplitKind k);
SplitKind split_from_string(std::string_view s);  // "fix" | "hard"

struct SplitSpec {
  SplitKind kind = SplitKind::fix;
  int samples_per_problem = 16;
  double hard_lo = 0.50;
  double hard_hi = 0.95;

  void validate() const;
  bool eligible(double pass_rate) const;
};

struct SplitResult {
  std::vector<Problem> corpus;
  std::vector<ItemError> dropped;
};

/// Scores every pool member on the gold tests, keeps eligible ones and
/// picks one per problem with a per-problem seeded generator.
SplitResult build_debug_split(const std::vector<Problem>& problems, const SplitSpec& spec, std::uint64_t seed,
                              const SubjectRunner& runner, int jobs = 1);

/// FNV-1a over the bytes of `s`.
std::uint64_t fnv1a(std::string_view s);

class ExtractionFailed : public Error {
 public:
  using Error::Error;
};

struct ExtractResult {
  std::vector<UnitTest> tests;
  std::size_t skipped = 0;
};

/// Collects `assert <entry_point>(<args>) == <expected>` lines. Throws
/// ExtractionFailed when nothing matches.
ExtractResult extract_assert_tests(std::string_view source, std::string_view entry_point);

}  // namespace utdebug
