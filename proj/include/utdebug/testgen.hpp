// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "utdebug/core.hpp"
#include "utdebug/gateway.hpp"
#include "utdebug/runner.hpp"

namespace utdebug {

/// random: T(d), never sees the target code. prompted: T(d, code) with an
/// off-the-shelf model. utgen: same prompt, finetuned model. oracle: test
/// only, reads the reference solution and the problem's input domain.
enum class StrategyKind { random, prompted, utgen, oracle };

std::string_view to_string(StrategyKind k);
StrategyKind strategy_from_string(std::string_view s);

struct GenStrategy {
  StrategyKind kind = StrategyKind::prompted;
  int n = 3;                // target suite size
  int k = 8;                // self-consistency samples per input
  double vote_floor = 0.5;  // accepted iff modal tally >= ceil(vote_floor * k)
  int input_retries = 3;    // completions per slot before giving up
  std::string model;        // gateway model override (utgen checkpoint)
  double temperature = 0.7;
  double top_p = 0.9;

  /// Throws ConfigError unless n >= 1, k >= 1 and 0 < vote_floor <= 1.
  void validate() const;
  /// ceil(vote_floor * k), computed without floating drift.
  int min_votes() const;
};

/// No valid argument list within the retry budget.
class SlotFailed : public Error {
 public:
  using Error::Error;
};

struct VoteGroup {
  std::string output;  // normalized text of the group's first sample
  int votes = 0;
  int first_index = 0;
};

struct ScResult {
  bool accepted = false;
  std::optional<CanonValue> value;
  int votes = 0;
  std::string reason;  // "", "below_floor", "all_unparsed"
  std::vector<VoteGroup> groups;
};

using SameOutput = std::function<bool(const std::string&, const std::string&)>;

/// Groups answers (nullopt = unparseable sample) into vote groups in order
/// of first appearance. `same` decides equality between normalized texts;
/// groups are merged transitively.
std::vector<VoteGroup> tally_votes(const std::vector<std::optional<std::string>>& answers, const SameOutput& same);

/// Modal group with earliest-sample tie-break and the vote floor applied.
ScResult decide_votes(std::vector<VoteGroup> groups, int k, int min_votes);

/// One row of the oracle's enumeration of a problem's input domain.
struct OracleRow {
  std::vector<std::string> args;
  bool reference_ok = false;
  std::string reference_value;
  bool diverges = false;
};

class UtGenerator {
 public:
  UtGenerator(Gateway& gateway, const SubjectRunner& runner, GenStrategy strategy);
  ~UtGenerator();

  const GenStrategy& strategy() const { return strategy_; }

  /// One argument list. `buggy` is required for prompted/utgen and must be
  /// null for random. Throws SlotFailed after input_retries bad samples.
  std::vector<std::string> sample_input(const Problem& problem, const CandidateCode* buggy,
                                        const std::string& context, int slot);

  /// k output samples for fixed args, majority vote, floor check.
  ScResult predict_output_sc(const Problem& problem, const CandidateCode* buggy,
                             const std::vector<std::string>& args, const std::string& context, int slot);

  /// One slot: input then voted output. nullopt when the slot fails or the
  /// vote is rejected.
  std::optional<UnitTest> sample_ut(const Problem& problem, const CandidateCode& buggy, const std::string& context,
                                    int slot = 0);

  /// Up to 3n slots, stopping once n distinct tests were accepted.
  std::vector<UnitTest> build_ut(const Problem& problem, const CandidateCode& buggy, const std::string& context);

  /// Full oracle enumeration of problem.input_domain against `code`.
  std::vector<OracleRow> oracle_rows(const Problem& problem, const CandidateCode& code);

  /// sample_input invocations (one per slot, retries included).
  long input_calls() const { return input_calls_.load(); }
  /// Gateway requests made while sampling inputs.
  long input_requests() const { return input_requests_.load(); }
  /// Output samples requested (k per predict_output_sc).
  long output_calls() const { return output_calls_.load(); }

  /// Prompt for input sampling (exposed for prompt-content assertions).
  std::vector<Message> input_prompt(const Problem& problem, const CandidateCode* buggy) const;
  /// Prompt for output prediction with the Arguments section pre-filled.
  std::vector<Message> output_prompt(const Problem& problem, const CandidateCode* buggy,
                                     const std::vector<std::string>& args) const;

 private:
  struct OracleState;
  struct OracleCursor;
  std::optional<UnitTest> oracle_ut(const Problem& problem, const CandidateCode& buggy, int slot);
  OracleState& oracle_state(const Problem& problem);
  // Extends the cursor's prefix of the domain until `done` holds or the
  // domain is exhausted. Caller holds the state's mutex.
  template <typename Done>
  void advance(OracleState& state, OracleCursor& cursor, const Problem& problem, const CandidateCode& code, Done done);
  Origin origin() const;

  Gateway& gateway_;
  const SubjectRunner& runner_;
  GenStrategy strategy_;
  std::atomic<long> input_calls_{0};
  std::atomic<long> output_calls_{0};
  std::atomic<long> input_requests_{0};
  std::mutex oracle_mu_;
  std::map<std::string, std::unique_ptr<OracleState>> oracle_states_;
};

}  // namespace utdebug
