// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "utdebug/core.hpp"
#include "utdebug/runner.hpp"
#include "utdebug/serialize.hpp"
#include "utdebug/testgen.hpp"

namespace utdebug {

/// The problem has no finite input enumeration.
class OracleUnavailable : public Error {
 public:
  using Error::Error;
};

struct ProblemOutcome {
  std::string problem_id;
  int run = 0;
  bool generated = false;  // a UT came out of the strategy at all
  bool attacked = false;
  bool out_correct = false;
  std::optional<UnitTest> ut;
  /// Transport failure while sampling; scored as a generation failure.
  std::optional<std::string> error;
};

struct IntrinsicRun {
  double attack_rate = 0.0;
  double output_acc = 0.0;
  double acc_and_attack = 0.0;
  std::vector<ProblemOutcome> per_problem;  // sorted by problem id
};

/// Percentages in [0, 100]; top-level values are means over runs.
struct IntrinsicReport {
  double attack_rate = 0.0;
  double output_acc = 0.0;
  double acc_and_attack = 0.0;
  int runs = 0;
  std::vector<IntrinsicRun> per_run;
};

/// One UT per problem per run, scored against the reference solution.
/// The buggy code is each problem's candidates[0]. Throws ConfigError before
/// sampling if any problem lacks reference_code or a candidate.
IntrinsicReport intrinsic(const std::vector<Problem>& corpus, UtGenerator& generator, const SubjectRunner& runner,
                          int runs = 3, int jobs = 1);

Json to_json(const IntrinsicReport& report);
/// Fixed-width summary table for terminals.
std::string format_table(const IntrinsicReport& report);

/// 100 * share of problems whose code passes every gold test. Throws
/// ConfigError when a problem lacks gold tests or a code.
double pass_at_1(const std::vector<Problem>& corpus, const std::map<std::string, CandidateCode>& codes,
                 const SubjectRunner& runner, int jobs = 1);

struct RerankResult {
  std::size_t index = 0;
  std::vector<int> scores;
  std::vector<UnitTest> union_suite;
  std::optional<std::string> warning;
};

/// Best-of-N: a suite per pool member, union deduplicated, candidate with
/// the most passes wins, lowest index on ties.
RerankResult rerank_best_of_n(const Problem& problem, const std::vector<CandidateCode>& pool,
                              UtGenerator& generator, const SubjectRunner& runner, const std::string& context = {});

struct OracleResult {
  bool true_attackable = false;
  std::vector<std::vector<std::string>> attack_set;
};

/// Runs reference and buggy code on every enumerated input and collects
/// the inputs where they disagree. Inputs the reference rejects are
/// skipped. Throws OracleUnavailable without an input domain.
OracleResult brute_force_oracle(const Problem& problem, const CandidateCode& buggy, const SubjectRunner& runner);

}  // namespace utdebug
