// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#include "utdebug/pipeline.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "utdebug/literal.hpp"
#include "utdebug/log.hpp"
#include "utdebug/parallel.hpp"
#include "utdebug/prompts.hpp"

namespace utdebug {

namespace {

CandidateCode reference_of(const Problem& p) { return {*p.reference_code, Provenance::sampled_model, std::nullopt}; }

struct ItemOutput {
  std::vector<SftRecord> records;
  bool filtered = false;
  std::optional<std::string> error;
};

GenRequest make_request(std::vector<Message> messages, const BootstrapConfig& cfg, std::string tag, int n = 1) {
  GenRequest req;
  req.messages = std::move(messages);
  req.temperature = cfg.temperature;
  req.top_p = cfg.top_p;
  req.model = cfg.model;
  req.n_samples = n;
  req.seed_tag = std::move(tag);
  return req;
}

// Stage-II text up to the line holding the last `Arguments:`, followed by
// the canonical input, the rationale and the forced output.
std::string assemble_completion(std::string_view stage2, const Problem& p, const UnitTest& ut,
                                std::string_view rationale) {
  std::string out;
  if (const auto at = stage2.rfind("Arguments:"); at != std::string_view::npos) {
    const auto line_start = stage2.rfind('\n', at);
    out = std::string(stage2.substr(0, line_start == std::string_view::npos ? 0 : line_start + 1));
  }
  out += "Arguments: " + p.entry_point + "(" + join_args(ut.args) + ")\n\n### Output\n\n";
  out += rationale;
  out += "\n\nOutput: " + ut.expected.text;
  return out;
}

// First failing input for one corruption within the attempt budget.
std::optional<std::pair<UnitTest, std::string>> find_failing_ut(const Problem& p, const CandidateCode& corrupted,
                                                                int index, Gateway& gateway,
                                                                const SubjectRunner& runner,
                                                                const BootstrapConfig& cfg) {
  const auto reference = reference_of(p);
  const auto messages =
      prompts::render(prompts::TemplateName::utgen_failing, prompts::problem_bindings(p, corrupted.source));
  for (int attempt = 0; attempt < cfg.input_attempts; ++attempt) {
    const auto tag = "input:" + p.id + ":c" + std::to_string(index) + ":t" + std::to_string(attempt);
    const auto completion = gateway.generate(make_request(messages, cfg, tag)).completions.front();
    prompts::ParsedUtResponse parsed;
    try {
      parsed = prompts::parse_unit_test(completion, p.entry_point);
    } catch (const ParseError&) {
      continue;
    }
    const auto ref = runner.call(reference, p, parsed.args);
    if (ref.status == ExecStatus::infra_error) throw InfraError(ref.error_msg.value_or("infra_error"));
    if (ref.status != ExecStatus::ok) continue;
    UnitTest ut{parsed.args, *ref.value, std::nullopt, std::nullopt, Origin::oracle};
    const auto got = runner.check(corrupted, p, ut);
    if (got.status == ExecStatus::infra_error) throw InfraError(got.error_msg.value_or("infra_error"));
    if (!got.passed()) return std::make_pair(std::move(ut), completion);
  }
  return std::nullopt;
}

ItemOutput bootstrap_item(const Problem& p, Gateway& gateway, const SubjectRunner& runner,
                          const BootstrapConfig& cfg) {
  ItemOutput out;
  if (const auto reason = cfg.filter.reject_reason(p, runner)) {
    log::debug(p.id + ": filtered (" + *reason + ")");
    out.filtered = true;
    return out;
  }
  const auto reference = reference_of(p);

  // Stage I: corrupted versions of the reference.
  const auto corrupt_resp = gateway.generate(make_request(
      prompts::render(prompts::TemplateName::corruption, prompts::problem_bindings(p, reference.source)), cfg,
      "corrupt:" + p.id, cfg.corruptions));
  std::vector<CandidateCode> corruptions;
  for (const auto& completion : corrupt_resp.completions) {
    CandidateCode code;
    try {
      code = prompts::parse_code_block(completion, p.entry_point);
    } catch (const ParseError&) {
      continue;
    }
    code.provenance = Provenance::perturbed;
    const auto body = literal::trim(code.source);
    if (body == literal::trim(reference.source)) continue;
    if (std::any_of(corruptions.begin(), corruptions.end(),
                    [&](const CandidateCode& c) { return literal::trim(c.source) == body; })) {
      continue;
    }
    if (!runner.loads(code.source, p.entry_point)) continue;
    corruptions.push_back(std::move(code));
  }

  // Stages II and III per corruption.
  for (std::size_t i = 0; i < corruptions.size(); ++i) {
    const auto& corrupted = corruptions[i];
    auto found = find_failing_ut(p, corrupted, static_cast<int>(i), gateway, runner, cfg);
    if (!found) continue;
    auto& [ut, stage2] = *found;

    const auto rationale_resp = gateway.generate(make_request(
        prompts::render(prompts::TemplateName::rationalization,
                        {
                            {"signature", p.signature},
                            {"description", p.description},
                            {"entry_point", p.entry_point},
                            {"unit_input", join_args(ut.args)},
                            {"unit_output", ut.expected.text},
                        }),
        cfg, "rationale:" + p.id + ":c" + std::to_string(i)));
    const auto rationale = prompts::extract_rationale(rationale_resp.completions.front());
    ut.rationale = rationale;

    SftRecord rec;
    rec.prompt = prompts::render_text(prompts::TemplateName::utgen_failing, prompts::problem_bindings(p, corrupted.source));
    rec.completion = assemble_completion(stage2, p, ut, rationale);
    rec.problem_id = p.id;
    rec.buggy_code = corrupted;
    rec.unit_test = std::move(ut);
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::optional<std::string> parse_assert(std::string_view line, std::string_view entry_point, UnitTest& ut) {
  auto rest = literal::trim(line.substr(std::string_view("assert").size()));
  if (const auto hash = literal::find_top_level(rest, "#")) rest = literal::trim(rest.substr(0, *hash));
  auto unwrap = [](std::string_view s) {
    while (!s.empty() && s.front() == '(') {
      const auto close = literal::matching_close(s, 0);
      if (!close || *close != s.size() - 1) break;
      s = literal::trim(s.substr(1, s.size() - 2));
    }
    return s;
  };
  // `assert (f(x) == y)`; a parenthesized call alone is unwrapped below.
  if (!rest.empty() && rest.front() == '(') {
    const auto inner = unwrap(rest);
    if (literal::find_top_level(inner, "==")) rest = inner;
  }
  const auto eq = literal::find_top_level(rest, "==");
  if (!eq) return "no top-level ==";
  const auto lhs = unwrap(literal::trim(rest.substr(0, *eq)));
  auto rhs = literal::trim(rest.substr(*eq + 2));
  if (const auto comma = literal::find_top_level(rhs, ",")) rhs = literal::trim(rhs.substr(0, *comma));
  if (rhs.empty()) return "empty expected value";
  if (literal::find_top_level(rhs, "==") || literal::find_top_level(rhs, " and ") ||
      literal::find_top_level(rhs, " or ")) {
    return "compound comparison";
  }
  if (lhs.substr(0, entry_point.size()) != entry_point) return "left side is not a call of the entry point";
  auto after = lhs.substr(entry_point.size());
  const auto paren = after.find_first_not_of(" \t");
  if (paren == std::string_view::npos || after[paren] != '(') return "left side is not a call of the entry point";
  after = after.substr(paren);
  const auto close = literal::matching_close(after, 0);
  if (!close || *close != after.size() - 1) return "left side is not a single call";
  try {
    ut.args = literal::split_top_level(after.substr(1, after.size() - 2));
  } catch (const ParseError& e) {
    return e.what();
  }
  ut.expected = CanonValue::from_text(std::string(rhs));
  ut.origin = Origin::gold;
  return std::nullopt;
}

}  // namespace

std::size_t whitespace_tokens(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::size_t n = 0;
  for (std::string tok; in >> tok;) ++n;
  return n;
}

void SourceFilter::validate() const {
  if (max_prompt_tokens == 0) throw ConfigError("max_prompt_tokens must be positive");
}

std::optional<std::string> SourceFilter::reject_reason(const Problem& item, const SubjectRunner& runner) const {
  const auto prompt = item.description + "\n" + item.signature;
  for (const auto& kw : require_keywords) {
    if (prompt.find(kw) == std::string::npos) return "missing keyword '" + kw + "'";
  }
  if (whitespace_tokens(prompt) > max_prompt_tokens) return "prompt longer than token budget";
  if (!item.reference_code) return "no reference code";
  if (require_clean_execution && !runner.loads(*item.reference_code, item.entry_point)) {
    return "reference code does not load";
  }
  return std::nullopt;
}

BootstrapResult bootstrap_sft(const std::vector<Problem>& source, Gateway& gateway, const SubjectRunner& runner,
                              const BootstrapConfig& cfg) {
  cfg.filter.validate();
  if (cfg.corruptions < 1 || cfg.input_attempts < 1) throw ConfigError("corruptions and input_attempts must be >= 1");
  std::vector<ItemOutput> outputs(source.size());
  parallel_for(source.size(), cfg.jobs, [&](std::size_t i) {
    try {
      outputs[i] = bootstrap_item(source[i], gateway, runner, cfg);
    } catch (const InfraError& e) {
      outputs[i].error = e.what();
    } catch (const GatewayError& e) {
      outputs[i].error = e.what();
    }
  });

  BootstrapResult result;
  result.items = source.size();
  for (std::size_t i = 0; i < source.size(); ++i) {
    auto& o = outputs[i];
    if (o.error) {
      result.errors.push_back({source[i].id, *o.error});
      continue;
    }
    if (o.filtered) {
      ++result.filtered;
      continue;
    }
    if (o.records.empty()) ++result.dropped_no_ut;
    for (auto& r : o.records) result.records.push_back(std::move(r));
  }

  const auto report = verify_sft(result.records, source, runner);
  if (!report.ok()) {
    throw Error("SFT verification failed for " + std::to_string(report.checked - report.passed) + " of " +
                std::to_string(report.checked) + " records: " + report.failures.front());
  }
  return result;
}

VerifyReport verify_sft(const std::vector<SftRecord>& records, const std::vector<Problem>& source,
                        const SubjectRunner& runner) {
  std::map<std::string, const Problem*> by_id;
  for (const auto& p : source) by_id[p.id] = &p;
  VerifyReport report;
  for (const auto& r : records) {
    ++report.checked;
    const auto it = by_id.find(r.problem_id);
    if (it == by_id.end() || !it->second->reference_code) {
      report.failures.push_back(r.problem_id + ": no reference code");
      continue;
    }
    const Problem& p = *it->second;
    const auto ref = runner.call(reference_of(p), p, r.unit_test.args);
    if (ref.status != ExecStatus::ok) {
      report.failures.push_back(r.problem_id + ": reference does not run on the input");
      continue;
    }
    if (ref.value->text != r.unit_test.expected.text &&
        !runner.literals_equal(ref.value->text, r.unit_test.expected.text)) {
      report.failures.push_back(r.problem_id + ": expected differs from the reference output");
      continue;
    }
    const auto got = runner.check(r.buggy_code, p, r.unit_test);
    if (got.status == ExecStatus::infra_error || got.passed()) {
      report.failures.push_back(r.problem_id + ": test does not fail on the buggy code");
      continue;
    }
    ++report.passed;
  }
  return report;
}

std::string_view to_string(SplitKind k) { return k == SplitKind::fix ? "fix" : "hard"; }

SplitKind split_from_string(std::string_view s) {
  if (s == "fix") return SplitKind::fix;
  if (s == "hard" || s == "fix_hard") return SplitKind::fix_hard;
  throw ConfigError("unknown split: " + std::string(s));
}

void SplitSpec::validate() const {
  if (samples_per_problem < 1) throw ConfigError("samples_per_problem must be >= 1");
  if (!(hard_lo >= 0.0 && hard_hi <= 1.0 && hard_lo < hard_hi)) throw ConfigError("hard band must satisfy 0 <= lo < hi <= 1");
}

bool SplitSpec::eligible(double pass_rate) const {
  if (kind == SplitKind::fix) return pass_rate < 1.0;
  return pass_rate >= hard_lo && pass_rate <= hard_hi;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

SplitResult build_debug_split(const std::vector<Problem>& problems, const SplitSpec& spec, std::uint64_t seed,
                              const SubjectRunner& runner, int jobs) {
  spec.validate();
  std::vector<std::optional<Problem>> chosen(problems.size());
  std::vector<std::string> reasons(problems.size());
  parallel_for(problems.size(), jobs, [&](std::size_t i) {
    const auto& p = problems[i];
    if (!p.gold_tests || p.gold_tests->empty()) {
      reasons[i] = "no gold tests";
      return;
    }
    if (p.candidates.empty()) {
      reasons[i] = "empty candidate pool";
      return;
    }
    std::vector<std::size_t> eligible;
    std::vector<std::vector<bool>> verdicts(p.candidates.size());
    std::vector<double> rates(p.candidates.size());
    for (std::size_t c = 0; c < p.candidates.size(); ++c) {
      std::size_t passed = 0;
      for (const auto& o : runner.run_suite(p.candidates[c], p, *p.gold_tests)) {
        if (o.status == ExecStatus::infra_error) throw InfraError(o.error_msg.value_or("infra_error"));
        verdicts[c].push_back(o.passed());
        passed += o.passed();
      }
      rates[c] = static_cast<double>(passed) / static_cast<double>(p.gold_tests->size());
      if (spec.eligible(rates[c])) eligible.push_back(c);
    }
    if (eligible.empty()) {
      reasons[i] = "no eligible candidate";
      return;
    }
    std::mt19937_64 rng(seed ^ fnv1a(p.id));
    const auto pick = eligible[rng() % eligible.size()];
    Problem out = p;
    out.candidates = {p.candidates[pick]};
    out.initial_pass_rate = rates[pick];
    out.initial_verdicts = verdicts[pick];
    chosen[i] = std::move(out);
  });

  SplitResult result;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    if (chosen[i]) {
      result.corpus.push_back(std::move(*chosen[i]));
    } else {
      log::info(problems[i].id + ": dropped from split (" + reasons[i] + ")");
      result.dropped.push_back({problems[i].id, reasons[i]});
    }
  }
  return result;
}

ExtractResult extract_assert_tests(std::string_view source, std::string_view entry_point) {
  ExtractResult result;
  std::size_t start = 0;
  while (start <= source.size()) {
    auto nl = source.find('\n', start);
    if (nl == std::string_view::npos) nl = source.size();
    const auto line = literal::trim(source.substr(start, nl - start));
    start = nl + 1;
    if (line.substr(0, 6) != "assert" || line.size() == 6 || (line[6] != ' ' && line[6] != '(')) continue;
    UnitTest ut;
    if (const auto why = parse_assert(line, entry_point, ut)) {
      log::debug("skipped assert line: " + std::string(line) + " (" + *why + ")");
      ++result.skipped;
      continue;
    }
    result.tests.push_back(std::move(ut));
  }
  if (result.tests.empty()) throw ExtractionFailed("no assert tests for " + std::string(entry_point));
  return result;
}

}  // namespace utdebug
