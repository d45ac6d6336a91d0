// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace utdebug {

/// Library version, echoed into traces and manifests.
std::string_view engine_version();

/// Base of every error the engine raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed model output or test text. Callers usually discard the sample.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or input files; raised before any model call.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class Origin { generated_random, generated_prompted, generated_utgen, gold, oracle };

enum class Provenance { human_bug, sampled_model, perturbed, edited_round_k };

enum class ValueKind { scalar, sequence, mapping, set, none, other };

std::string_view to_string(Origin o);
std::string_view to_string(Provenance p);
std::string_view to_string(ValueKind k);
Origin origin_from_string(std::string_view s);
Provenance provenance_from_string(std::string_view s);

/// Canonical literal rendering of a runtime value.
struct CanonValue {
  std::string text;
  ValueKind kind = ValueKind::other;

  static CanonValue from_text(std::string text);

  friend bool operator==(const CanonValue&, const CanonValue&) = default;
};

/// Kind inferred from the leading token of a canonical literal.
ValueKind infer_kind(std::string_view literal);

struct UnitTest {
  std::vector<std::string> args;
  CanonValue expected;
  std::optional<std::string> rationale;
  std::optional<int> votes;
  Origin origin = Origin::gold;
};

struct CandidateCode {
  std::string source;
  Provenance provenance = Provenance::sampled_model;
  std::optional<int> round;

  static CandidateCode edited(std::string source, int round) {
    return {std::move(source), Provenance::edited_round_k, round};
  }

  friend bool operator==(const CandidateCode&, const CandidateCode&) = default;
};

struct Problem {
  std::string id;
  std::string description;
  std::string entry_point;
  std::string signature;
  std::optional<std::string> reference_code;
  std::optional<std::vector<UnitTest>> gold_tests;
  std::string source_tag;
  std::vector<CandidateCode> candidates;
  /// Finite input enumeration, one argument list per element. Only toy
  /// corpora carry it; the brute-force oracle requires it.
  std::optional<std::vector<std::vector<std::string>>> input_domain;
  /// Set by the split builder: gold pass rate of candidates[0] and its
  /// per-test verdicts.
  std::optional<double> initial_pass_rate;
  std::optional<std::vector<bool>> initial_verdicts;
};

/// Throws ConfigError when a Problem violates its invariants.
void validate(const Problem& p);

struct RoundRecord {
  int round = 0;
  int suite_version = 0;
  std::vector<UnitTest> suite;
  std::optional<UnitTest> failing_used;
  double pre_pass = 0.0;
  double post_pass = 0.0;
  bool accepted = false;
  /// False for self-critique rounds, which have no suite to validate on.
  bool validated = true;
  CandidateCode code_after;
  /// Feedback text shown to the editor this round.
  std::string feedback;
  std::string note;
};

struct DebugTrace {
  std::string problem_id;
  CandidateCode initial_code;
  std::vector<RoundRecord> rounds;
  CandidateCode final_code;
  /// "all_pass", "no_tests", "declared_correct", "rounds_exhausted".
  std::string exit_reason;
  int exit_round = 0;
  std::vector<UnitTest> exit_suite;
  std::vector<std::string> warnings;
  int edit_calls = 0;
  int suite_builds = 0;
};

struct SftRecord {
  std::string prompt;
  std::string completion;
  std::string problem_id;
  CandidateCode buggy_code;
  UnitTest unit_test;
};

/// Two-line textual form: `Arguments: ep(a, b)` / `Output: <expected>`.
std::string render_unit_test(const UnitTest& ut, std::string_view entry_point);

/// Argument list as it appears inside a call, e.g. `[1, 2], 'x'`.
std::string join_args(const std::vector<std::string>& args);

/// Deterministic identity of a test: canonicalized args and expected text.
std::string dedup_key(const UnitTest& ut);

/// Removes duplicate tests, keeping the first occurrence.
std::vector<UnitTest> dedup(std::vector<UnitTest> suite);

}  // namespace utdebug
