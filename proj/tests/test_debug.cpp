// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "utdebug/debug.hpp"
#include "utdebug/prompts.hpp"

using namespace utdebug;

namespace {

const SubjectRunner& runner() {
  static SubjectRunner r(support::runner_config());
  return r;
}

Problem double_problem() {
  Problem p;
  p.id = "dbl";
  p.description = "Return 2 * x.";
  p.entry_point = "dbl";
  p.signature = "def dbl(x):";
  p.reference_code = "def dbl(x):\n    return 2 * x\n";
  p.gold_tests.emplace();
  for (int x = 0; x < 10; x += 3) {
    p.gold_tests->push_back({{std::to_string(x)}, CanonValue::from_text(std::to_string(2 * x)), std::nullopt,
                             std::nullopt, Origin::gold});
  }
  return p;
}

// Variants of varying quality; the empty entry is an unparseable edit.
const std::vector<std::string> kVariants = {
    "def dbl(x):\n    return 2 * x\n",
    "def dbl(x):\n    return x + x if x > 2 else 0\n",
    "def dbl(x):\n    return 2 * x if x % 2 else x\n",
    "def dbl(x):\n    return 0\n",
    "def dbl(x):\n    raise ValueError(x)\n",
    "def dbl(x):\n    return 2 * x if x < 7 else -1\n",
    "",
};

std::string edit_completion(const std::string& code) {
  return code.empty() ? "I could not find the bug." : "Fixed.\n\n" + prompts::fence(code) + "\n";
}

UnitTest t(int x) {
  return {{std::to_string(x)}, CanonValue::from_text(std::to_string(2 * x)), std::nullopt, std::nullopt, Origin::oracle};
}

std::shared_ptr<Backend> no_model() {
  return std::make_shared<FunctionBackend>([](const GenRequest& r, int) -> std::vector<std::string> {
    throw GatewayError("unexpected model call: " + r.seed_tag);
  });
}

}  // namespace

TEST(Debug, Fig3BacktrackThenAccept) {
  const auto corpus = read_corpus(support::fixture("fig3_corpus.jsonl"));
  ASSERT_EQ(corpus.size(), 1u);
  const auto& p = corpus.front();
  auto backend = std::shared_ptr<Backend>(ScriptedBackend::from_file(support::fixture("fig3.json")));
  Gateway gw(backend);
  DebugConfig cfg;
  cfg.rounds = 3;
  Debugger dbg(gw, runner(), cfg);
  const auto trace = dbg.debug(p, p.candidates.front());
  ASSERT_EQ(trace.rounds.size(), 2u);
  EXPECT_FALSE(trace.rounds[0].accepted);
  EXPECT_EQ(trace.rounds[0].note, "backtrack");
  EXPECT_TRUE(trace.rounds[1].accepted);
  EXPECT_EQ(trace.rounds[0].code_after, p.candidates.front());
  EXPECT_EQ(trace.final_code.source, *p.reference_code);
  EXPECT_EQ(trace.final_code.round, 2);
  EXPECT_EQ(trace.exit_reason, "all_pass");
  // The first suite test (123 -> 131) fails on the half-mirror code.
  ASSERT_TRUE(trace.rounds[0].failing_used);
  EXPECT_EQ(trace.rounds[0].failing_used->args, std::vector<std::string>{"123"});
  EXPECT_NE(trace.rounds[0].feedback.find("next_smallest_pld(123)"), std::string::npos);
}

TEST(Debug, RandomizedRunsAreMonotone) {
  std::mt19937 rng(2026);
  const auto p = double_problem();
  int violations = 0, accepted = 0, backtracked = 0;
  for (int run = 0; run < 200; ++run) {
    Gateway gw(std::make_shared<FunctionBackend>([&](const GenRequest&, int) {
      return std::vector<std::string>{edit_completion(kVariants[rng() % kVariants.size()])};
    }));
    DebugConfig cfg;
    cfg.rounds = 1 + static_cast<int>(rng() % 4);
    cfg.regen_policy = rng() % 2 ? RegenPolicy::on_accept : RegenPolicy::every_round;
    Debugger dbg(gw, runner(), cfg, [&](const Problem&, const CandidateCode&, const std::string&) {
      std::vector<UnitTest> suite;
      for (int i = 0, n = 1 + static_cast<int>(rng() % 4); i < n; ++i) suite.push_back(t(static_cast<int>(rng() % 10)));
      return dedup(suite);
    });
    const auto initial = support::code(kVariants[1 + rng() % 5]);
    const auto trace = dbg.debug(p, initial);

    CandidateCode current = initial;
    const RoundRecord* prev = nullptr;
    for (const auto& r : trace.rounds) {
      // Independent recount of the retained code on this round's suite.
      int pass = 0;
      for (const auto& ut : r.suite) pass += runner().check(r.code_after, p, ut).passed();
      const double retained = static_cast<double>(pass) / static_cast<double>(r.suite.size());
      if (retained + 1e-12 < r.pre_pass) ++violations;
      if (r.accepted && !(r.post_pass > r.pre_pass)) ++violations;
      if (r.accepted && std::abs(retained - r.post_pass) > 1e-12) ++violations;
      if (!r.accepted && r.code_after != current) ++violations;
      if (prev && prev->suite_version == r.suite_version && r.pre_pass + 1e-12 < prev->pre_pass) ++violations;
      accepted += r.accepted;
      backtracked += !r.accepted;
      current = r.code_after;
      prev = &r;
    }
    if (trace.final_code != current) ++violations;
    if (trace.edit_calls > cfg.rounds || trace.suite_builds > cfg.rounds) ++violations;
  }
  EXPECT_EQ(violations, 0);
  EXPECT_GT(accepted, 0);
  EXPECT_GT(backtracked, 0);
}

TEST(Debug, PassingCodeIsReturnedUntouched) {
  const auto p = double_problem();
  Gateway gw(no_model());
  Debugger dbg(gw, runner(), {}, [](const Problem&, const CandidateCode&, const std::string&) {
    return std::vector<UnitTest>{t(4), t(5)};
  });
  // Wrong on 0 only, which the suite never probes.
  const auto initial = support::code("def dbl(x):\n    return 2 * x if x else 1   \n\n");
  const auto trace = dbg.debug(p, initial);
  EXPECT_EQ(trace.exit_reason, "all_pass");
  EXPECT_EQ(trace.exit_round, 1);
  EXPECT_TRUE(trace.rounds.empty());
  EXPECT_EQ(trace.final_code.source, initial.source);
  EXPECT_EQ(trace.final_code, initial);
  EXPECT_EQ(trace.edit_calls, 0);
}

TEST(Debug, EmptySuiteExitsWithoutEditing) {
  const auto p = double_problem();
  Gateway gw(no_model());
  Debugger dbg(gw, runner(), {}, [](const Problem&, const CandidateCode&, const std::string&) {
    return std::vector<UnitTest>{};
  });
  const auto initial = support::code(kVariants[3]);
  const auto trace = dbg.debug(p, initial);
  EXPECT_EQ(trace.exit_reason, "no_tests");
  EXPECT_EQ(trace.final_code, initial);
}

TEST(Debug, GoldSuiteNeverLowersGoldPassRate) {
  std::mt19937 rng(17);
  const auto p = double_problem();
  for (int run = 0; run < 30; ++run) {
    Gateway gw(std::make_shared<FunctionBackend>([&](const GenRequest&, int) {
      return std::vector<std::string>{edit_completion(kVariants[rng() % kVariants.size()])};
    }));
    DebugConfig cfg;
    cfg.rounds = 3;
    Debugger dbg(gw, runner(), cfg, [](const Problem& prob, const CandidateCode&, const std::string&) {
      return *prob.gold_tests;
    });
    const auto initial = support::code(kVariants[1 + rng() % 5]);
    const auto trace = dbg.debug(p, initial);
    EXPECT_GE(runner().pass_rate(trace.final_code, p, *p.gold_tests), runner().pass_rate(initial, p, *p.gold_tests));
  }
}

TEST(Debug, EveryRoundRegeneratesAndParseErrorsBacktrack) {
  const auto p = double_problem();
  Gateway gw(std::make_shared<FunctionBackend>([](const GenRequest&, int) {
    return std::vector<std::string>{"no code"};
  }));
  DebugConfig cfg;
  cfg.rounds = 3;
  cfg.regen_policy = RegenPolicy::every_round;
  int builds = 0;
  Debugger dbg(gw, runner(), cfg, [&](const Problem&, const CandidateCode&, const std::string& ctx) {
    ++builds;
    EXPECT_NE(ctx.find(":v" + std::to_string(builds)), std::string::npos);
    return std::vector<UnitTest>{t(3)};
  });
  const auto trace = dbg.debug(p, support::code(kVariants[3]));
  EXPECT_EQ(builds, 3);
  EXPECT_EQ(trace.suite_builds, 3);
  EXPECT_EQ(trace.edit_calls, 3);
  ASSERT_EQ(trace.rounds.size(), 3u);
  for (const auto& r : trace.rounds) {
    EXPECT_EQ(r.note, "edit_parse_error");
    EXPECT_FALSE(r.accepted);
  }
  EXPECT_EQ(trace.exit_reason, "rounds_exhausted");
}

TEST(DebugNoUt, DeclaredCorrectStopsAtRoundOne) {
  const auto p = double_problem();
  Gateway gw(std::make_shared<ScriptedBackend>(std::vector<ScriptEntry>{
      {{}, "critique:", {"Looks fine. " + std::string(prompts::kCorrectSentinel)}, false}}));
  DebugConfig cfg;
  cfg.feedback_style = FeedbackStyle::no_ut;
  Debugger dbg(gw, runner(), cfg);
  const auto initial = support::code(kVariants[3]);
  const auto trace = dbg.run(p, initial);
  EXPECT_EQ(trace.exit_reason, "declared_correct");
  EXPECT_EQ(trace.exit_round, 1);
  EXPECT_EQ(trace.final_code, initial);
  EXPECT_EQ(trace.edit_calls, 0);
}

TEST(DebugNoUt, WrongThriceKeepsLastEdit) {
  const auto p = double_problem();
  Gateway gw(std::make_shared<ScriptedBackend>(std::vector<ScriptEntry>{
      {{}, "critique:", {std::string(prompts::kWrongSentinel)}, true},
      {{}, "edit:", {edit_completion(kVariants[1]), edit_completion(kVariants[0]), edit_completion(kVariants[4])}, false},
  }));
  DebugConfig cfg;
  cfg.feedback_style = FeedbackStyle::no_ut;
  cfg.rounds = 3;
  Debugger dbg(gw, runner(), cfg);
  const auto trace = dbg.run(p, support::code(kVariants[3]));
  EXPECT_EQ(trace.exit_reason, "rounds_exhausted");
  ASSERT_EQ(trace.rounds.size(), 3u);
  for (const auto& r : trace.rounds) {
    EXPECT_TRUE(r.accepted);
    EXPECT_FALSE(r.validated);
  }
  // Unvalidated: the correct round-2 edit is overwritten by round 3.
  EXPECT_EQ(trace.final_code.source, kVariants[4]);
  EXPECT_EQ(trace.final_code.round, 3);
}

TEST(DebugNoUt, MissingSentinelWarns) {
  const auto p = double_problem();
  Gateway gw(std::make_shared<ScriptedBackend>(std::vector<ScriptEntry>{
      {{}, "critique:", {"Hmm."}, true},
      {{}, "edit:", {edit_completion(kVariants[0])}, true},
  }));
  DebugConfig cfg;
  cfg.feedback_style = FeedbackStyle::no_ut;
  cfg.rounds = 1;
  Debugger dbg(gw, runner(), cfg);
  const auto trace = dbg.run(p, support::code(kVariants[3]));
  EXPECT_EQ(trace.warnings.size(), 1u);
  EXPECT_EQ(trace.final_code.source, kVariants[0]);
}

TEST(Debug, ConfigValidation) {
  DebugConfig cfg;
  cfg.rounds = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_EQ(regen_from_string("every-round"), RegenPolicy::every_round);
  EXPECT_EQ(feedback_from_string("no-ut"), FeedbackStyle::no_ut);
  EXPECT_THROW(feedback_from_string("x"), ConfigError);
}
