// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "utdebug/core.hpp"
#include "utdebug/gateway.hpp"
#include "utdebug/runner.hpp"
#include "utdebug/serialize.hpp"
#include "utdebug/testgen.hpp"

namespace utdebug {

enum class RegenPolicy { on_accept, every_round };
enum class FeedbackStyle { ut_feedback, no_ut };

std::string_view to_string(RegenPolicy p);
std::string_view to_string(FeedbackStyle f);
RegenPolicy regen_from_string(std::string_view s);  // "on-accept" | "every-round"
FeedbackStyle feedback_from_string(std::string_view s);  // "ut" | "no-ut"

struct DebugConfig {
  int rounds = 3;
  GenStrategy strategy;
  RegenPolicy regen_policy = RegenPolicy::on_accept;
  FeedbackStyle feedback_style = FeedbackStyle::ut_feedback;
  /// Sampling settings for critiques and edits.
  std::string edit_model;
  double temperature = 0.7;
  double top_p = 0.9;

  void validate() const;
};

Json to_json(const DebugConfig& cfg);

/// Produces a suite for the current code. The default provider is
/// UtGenerator::build_ut with the configured strategy.
using SuiteProvider =
    std::function<std::vector<UnitTest>(const Problem&, const CandidateCode&, const std::string& context)>;

class Debugger {
 public:
  Debugger(Gateway& gateway, const SubjectRunner& runner, DebugConfig cfg, SuiteProvider suites = {});

  const DebugConfig& config() const { return cfg_; }

  /// Dispatches on cfg.feedback_style.
  DebugTrace run(const Problem& problem, const CandidateCode& initial);

  /// Test-feedback debugging with suite validation and backtracking.
  DebugTrace debug(const Problem& problem, const CandidateCode& initial);

  /// Self-critique baseline: every parsed edit is kept.
  DebugTrace debug_no_ut(const Problem& problem, const CandidateCode& initial);

  UtGenerator* generator() { return generator_.get(); }

 private:
  std::string sample_edit(const Problem& problem, const CandidateCode& code, const std::string& feedback,
                          int round);

  Gateway& gateway_;
  const SubjectRunner& runner_;
  DebugConfig cfg_;
  std::unique_ptr<UtGenerator> generator_;
  SuiteProvider suites_;
};

/// Feedback block for one failing test: input call, actual behavior, expected.
std::string ut_feedback_text(const Problem& problem, const UnitTest& ut, const ExecOutcome& outcome);

/// Trace file body: the trace plus engine version and config echo.
Json trace_document(const DebugTrace& trace, const DebugConfig& cfg);

}  // namespace utdebug
