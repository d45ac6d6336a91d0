// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#include "utdebug/debug.hpp"

#include <algorithm>

#include "utdebug/literal.hpp"
#include "utdebug/log.hpp"
#include "utdebug/prompts.hpp"

namespace utdebug {

namespace {

double rate_of(const std::vector<ExecOutcome>& outcomes) {
  if (outcomes.empty()) return 0.0;
  std::size_t passed = 0;
  for (const auto& o : outcomes) {
    if (o.status == ExecStatus::infra_error) throw InfraError(o.error_msg.value_or("infra_error"));
    if (o.passed()) ++passed;
  }
  return static_cast<double>(passed) / static_cast<double>(outcomes.size());
}

std::string round_tag(std::string_view phase, const Problem& p, int round) {
  return std::string(phase) + ":" + p.id + ":r" + std::to_string(round);
}

}  // namespace

std::string_view to_string(RegenPolicy p) { return p == RegenPolicy::on_accept ? "on-accept" : "every-round"; }
std::string_view to_string(FeedbackStyle f) { return f == FeedbackStyle::ut_feedback ? "ut" : "no-ut"; }

RegenPolicy regen_from_string(std::string_view s) {
  if (s == "on-accept") return RegenPolicy::on_accept;
  if (s == "every-round") return RegenPolicy::every_round;
  throw ConfigError("unknown regen policy: " + std::string(s));
}

FeedbackStyle feedback_from_string(std::string_view s) {
  if (s == "ut") return FeedbackStyle::ut_feedback;
  if (s == "no-ut") return FeedbackStyle::no_ut;
  throw ConfigError("unknown feedback style: " + std::string(s));
}

void DebugConfig::validate() const {
  if (rounds < 1) throw ConfigError("rounds must be >= 1");
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  strategy.validate();
}

Json to_json(const DebugConfig& cfg) {
  Json j;
  j["rounds"] = cfg.rounds;
  j["strategy"] = std::string(to_string(cfg.strategy.kind));
  j["n"] = cfg.strategy.n;
  j["k"] = cfg.strategy.k;
  j["vote_floor"] = cfg.strategy.vote_floor;
  j["ut_model"] = cfg.strategy.model;
  j["regen"] = std::string(to_string(cfg.regen_policy));
  j["feedback"] = std::string(to_string(cfg.feedback_style));
  j["edit_model"] = cfg.edit_model;
  j["temperature"] = cfg.temperature;
  j["top_p"] = cfg.top_p;
  return j;
}

std::string ut_feedback_text(const Problem& problem, const UnitTest& ut, const ExecOutcome& outcome) {
  return prompts::render_text(prompts::TemplateName::ut_feedback,
                              {
                                  {"wrong_testcase_input", problem.entry_point + "(" + join_args(ut.args) + ")"},
                                  {"wrong_testcase_output", outcome.behavior()},
                                  {"wrong_testcase_expected", ut.expected.text},
                              });
}

Json trace_document(const DebugTrace& trace, const DebugConfig& cfg) {
  Json j = to_json(trace);
  j["engine_version"] = std::string(engine_version());
  j["config"] = to_json(cfg);
  return j;
}

Debugger::Debugger(Gateway& gateway, const SubjectRunner& runner, DebugConfig cfg, SuiteProvider suites)
    : gateway_(gateway), runner_(runner), cfg_(std::move(cfg)), suites_(std::move(suites)) {
  cfg_.validate();
  if (!suites_) {
    generator_ = std::make_unique<UtGenerator>(gateway_, runner_, cfg_.strategy);
    suites_ = [gen = generator_.get()](const Problem& p, const CandidateCode& c, const std::string& ctx) {
      return gen->build_ut(p, c, ctx);
    };
  }
}

DebugTrace Debugger::run(const Problem& problem, const CandidateCode& initial) {
  return cfg_.feedback_style == FeedbackStyle::no_ut ? debug_no_ut(problem, initial) : debug(problem, initial);
}

std::string Debugger::sample_edit(const Problem& problem, const CandidateCode& code, const std::string& feedback,
                                  int round) {
  auto bindings = prompts::problem_bindings(problem, code.source);
  bindings["feedback"] = feedback;
  GenRequest req;
  req.messages = prompts::render(prompts::TemplateName::code_fix, bindings);
  req.temperature = cfg_.temperature;
  req.top_p = cfg_.top_p;
  req.model = cfg_.edit_model;
  req.seed_tag = round_tag("edit", problem, round);
  return gateway_.generate(std::move(req)).completions.front();
}

DebugTrace Debugger::debug(const Problem& problem, const CandidateCode& initial) {
  DebugTrace trace;
  trace.problem_id = problem.id;
  trace.initial_code = initial;
  CandidateCode code = initial;

  std::optional<std::vector<UnitTest>> suite;
  std::optional<std::vector<ExecOutcome>> verdicts;  // of `code` on `suite`
  int suite_version = 0;

  for (int round = 1; round <= cfg_.rounds; ++round) {
    if (!suite || cfg_.regen_policy == RegenPolicy::every_round) {
      const auto context = problem.id + ":r" + std::to_string(round) + ":v" + std::to_string(suite_version + 1);
      suite = suites_(problem, code, context);
      ++trace.suite_builds;
      ++suite_version;
      verdicts.reset();
    }
    if (suite->empty()) {
      trace.exit_reason = "no_tests";
      trace.exit_round = round;
      trace.final_code = code;
      return trace;
    }
    if (!verdicts) verdicts = runner_.run_suite(code, problem, *suite);
    const double pre = rate_of(*verdicts);
    const auto failing = std::find_if(verdicts->begin(), verdicts->end(), [](const ExecOutcome& o) { return !o.passed(); });
    if (failing == verdicts->end()) {
      trace.exit_reason = "all_pass";
      trace.exit_round = round;
      trace.exit_suite = *suite;
      trace.final_code = code;
      return trace;
    }
    const auto& failing_ut = (*suite)[static_cast<std::size_t>(failing - verdicts->begin())];

    RoundRecord rec;
    rec.round = round;
    rec.suite_version = suite_version;
    rec.suite = *suite;
    rec.failing_used = failing_ut;
    rec.pre_pass = pre;
    rec.feedback = ut_feedback_text(problem, failing_ut, *failing);

    const auto completion = sample_edit(problem, code, rec.feedback, round);
    ++trace.edit_calls;
    std::optional<CandidateCode> edit;
    try {
      edit = CandidateCode::edited(prompts::parse_code_block(completion, problem.entry_point).source, round);
    } catch (const ParseError& e) {
      rec.note = "edit_parse_error";
      log::debug(problem.id + ": round " + std::to_string(round) + ": " + e.what());
    }

    if (edit) {
      auto post_verdicts = runner_.run_suite(*edit, problem, *suite);
      rec.post_pass = rate_of(post_verdicts);
      rec.accepted = rec.post_pass > rec.pre_pass;
      if (rec.accepted) {
        code = *edit;
        suite.reset();
        verdicts.reset();
      } else {
        rec.note = "backtrack";
      }
    }
    rec.code_after = code;
    trace.rounds.push_back(std::move(rec));
  }
  trace.exit_reason = "rounds_exhausted";
  trace.exit_round = cfg_.rounds;
  trace.final_code = code;
  return trace;
}

DebugTrace Debugger::debug_no_ut(const Problem& problem, const CandidateCode& initial) {
  DebugTrace trace;
  trace.problem_id = problem.id;
  trace.initial_code = initial;
  CandidateCode code = initial;

  for (int round = 1; round <= cfg_.rounds; ++round) {
    GenRequest critique_req;
    critique_req.messages =
        prompts::render(prompts::TemplateName::no_ut_feedback, prompts::problem_bindings(problem, code.source));
    critique_req.temperature = cfg_.temperature;
    critique_req.top_p = cfg_.top_p;
    critique_req.model = cfg_.edit_model;
    critique_req.seed_tag = round_tag("critique", problem, round);
    const auto critique = gateway_.generate(std::move(critique_req)).completions.front();

    const auto verdict = prompts::critique_verdict(critique);
    if (verdict == prompts::Verdict::correct) {
      trace.exit_reason = "declared_correct";
      trace.exit_round = round;
      trace.final_code = code;
      return trace;
    }
    if (verdict == prompts::Verdict::unknown) {
      trace.warnings.push_back("round " + std::to_string(round) + ": critique has no verdict sentinel");
      log::warn(problem.id + ": critique without verdict sentinel, treating as wrong");
    }

    RoundRecord rec;
    rec.round = round;
    rec.validated = false;
    rec.feedback = std::string(literal::trim(critique));
    const auto completion = sample_edit(problem, code, rec.feedback, round);
    ++trace.edit_calls;
    try {
      code = CandidateCode::edited(prompts::parse_code_block(completion, problem.entry_point).source, round);
      rec.accepted = true;
      rec.note = "unvalidated";
    } catch (const ParseError&) {
      rec.note = "edit_parse_error";
    }
    rec.code_after = code;
    trace.rounds.push_back(std::move(rec));
  }
  trace.exit_reason = "rounds_exhausted";
  trace.exit_round = cfg_.rounds;
  trace.final_code = code;
  return trace;
}

}  // namespace utdebug
