// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "utdebug/core.hpp"
#include "utdebug/serialize.hpp"

namespace utdebug {

/// Harness crashed, could not be spawned, or broke the stdio protocol.
class InfraError : public Error {
 public:
  using Error::Error;
};

enum class ExecStatus { ok, exception, timeout, load_error, arg_error, infra_error };

std::string_view to_string(ExecStatus s);
ExecStatus exec_status_from_string(std::string_view s);

struct ExecOutcome {
  ExecStatus status = ExecStatus::infra_error;
  std::optional<CanonValue> value;
  std::optional<bool> equal;
  std::optional<std::string> error_type;
  std::optional<std::string> error_msg;
  int duration_ms = 0;

  /// A unit test passes only on status ok with equal == true.
  bool passed() const { return status == ExecStatus::ok && equal.value_or(false); }

  /// What the candidate did: its value, or the error type name.
  std::string behavior() const;
};

enum class HarnessMode { call, check };

/// One request on the harness wire; field names match the JSON keys.
struct HarnessRequest {
  HarnessMode mode = HarnessMode::call;
  std::string code;
  std::string entry_point;
  std::vector<std::string> args_expr;
  std::optional<std::string> expected_expr;
  int timeout_ms = 5000;
  double float_abs_tol = 1e-6;
  double float_rel_tol = 1e-6;

  Json to_json() const;
};

/// Parses exactly one response line. Throws InfraError on any protocol
/// violation (extra output, missing fields, broken invariants).
ExecOutcome parse_harness_response(const std::string& stdout_text, HarnessMode mode);

struct RunnerConfig {
  int timeout_ms = 5000;
  int max_parallel = 0;  // 0 = logical CPU count
  double float_abs_tol = 1e-6;
  double float_rel_tol = 1e-6;
  std::string harness_path;  // empty = UTD_HARNESS env, then the bundled script
  std::string python;        // empty = UTD_PYTHON env, then python3
  /// Extra wall-clock time granted past timeout_ms before the process
  /// group is killed.
  int kill_grace_ms = 400;
  /// Reuse outcomes of byte-identical requests. Timeouts and infra errors
  /// are never cached.
  bool memoize = false;
};

class SubjectRunner {
 public:
  explicit SubjectRunner(RunnerConfig cfg = {});

  const RunnerConfig& config() const { return cfg_; }

  ExecOutcome call(const CandidateCode& code, const Problem& problem,
                   const std::vector<std::string>& args) const;
  ExecOutcome check(const CandidateCode& code, const Problem& problem, const UnitTest& ut) const;

  /// Runs every test in its own harness process, in parallel up to
  /// max_parallel. Outcomes are in suite order.
  std::vector<ExecOutcome> run_suite(const CandidateCode& code, const Problem& problem,
                                     const std::vector<UnitTest>& suite) const;

  /// Fraction of tests passed. Throws InfraError if any execution hit
  /// an infrastructure failure; exceptions and timeouts count as failures.
  double pass_rate(const CandidateCode& code, const Problem& problem,
                   const std::vector<UnitTest>& suite) const;

  /// True when the source imports cleanly and defines entry_point.
  bool loads(const std::string& source, const std::string& entry_point) const;

  /// True when every literal evaluates (no arg_error).
  bool args_valid(const std::vector<std::string>& args) const;

  /// Harness equality between two literals (float tolerance applies).
  bool literals_equal(const std::string& actual, const std::string& expected) const;

  /// One harness round trip with a single retry on infra_error.
  ExecOutcome execute(const HarnessRequest& req) const;

  long executions() const;

 private:
  struct Shared;
  ExecOutcome execute_once(const HarnessRequest& req) const;
  HarnessRequest make_request(HarnessMode mode, const std::string& code, const std::string& entry,
                              std::vector<std::string> args, std::optional<std::string> expected) const;

  RunnerConfig cfg_;
  std::shared_ptr<Shared> shared_;
};

/// Default location of the harness script.
std::string default_harness_path();

}  // namespace utdebug
