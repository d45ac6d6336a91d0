// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#include "utdebug/testgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "utdebug/literal.hpp"
#include "utdebug/log.hpp"
#include "utdebug/prompts.hpp"

namespace utdebug {

namespace {

constexpr std::array kKindNames = {"random", "prompted", "utgen", "oracle"};

std::string seed_tag(std::string_view phase, const std::string& context, int slot, int attempt = -1) {
  std::string tag(phase);
  tag += ':';
  tag += context;
  tag += ":s" + std::to_string(slot);
  if (attempt >= 0) tag += ":t" + std::to_string(attempt);
  return tag;
}

// Union-find over group indices.
struct Dsu {
  std::vector<int> parent;
  explicit Dsu(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  // The root is always the smaller index, i.e. the earlier group.
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

std::string_view to_string(StrategyKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

StrategyKind strategy_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (s == kKindNames[i]) return static_cast<StrategyKind>(i);
  }
  throw ConfigError("unknown strategy: " + std::string(s));
}

void GenStrategy::validate() const {
  if (n < 1) throw ConfigError("n must be >= 1");
  if (k < 1) throw ConfigError("k must be >= 1");
  if (!(vote_floor > 0.0 && vote_floor <= 1.0)) throw ConfigError("vote_floor must be in (0, 1]");
  if (input_retries < 1) throw ConfigError("input_retries must be >= 1");
}

int GenStrategy::min_votes() const { return static_cast<int>(std::ceil(vote_floor * k - 1e-9)); }

std::vector<VoteGroup> tally_votes(const std::vector<std::optional<std::string>>& answers, const SameOutput& same) {
  // Exact text grouping first; `same` only merges distinct texts.
  std::vector<VoteGroup> groups;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (!answers[i]) continue;
    auto text = literal::normalize(*answers[i]);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const VoteGroup& g) { return g.output == text; });
    if (it != groups.end()) {
      ++it->votes;
    } else {
      groups.push_back({std::move(text), 1, static_cast<int>(i)});
    }
  }
  if (!same || groups.size() < 2) return groups;
  Dsu dsu(groups.size());
  for (std::size_t a = 0; a < groups.size(); ++a) {
    for (std::size_t b = a + 1; b < groups.size(); ++b) {
      if (dsu.find(static_cast<int>(a)) == dsu.find(static_cast<int>(b))) continue;
      if (same(groups[a].output, groups[b].output)) dsu.unite(static_cast<int>(a), static_cast<int>(b));
    }
  }
  std::vector<VoteGroup> merged;
  std::vector<int> slot_of(groups.size(), -1);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const int root = dsu.find(static_cast<int>(g));
    if (slot_of[root] < 0) {
      slot_of[root] = static_cast<int>(merged.size());
      merged.push_back(groups[root]);
      merged.back().votes = 0;
    }
    merged[slot_of[root]].votes += groups[g].votes;
  }
  return merged;
}

ScResult decide_votes(std::vector<VoteGroup> groups, int k, int min_votes) {
  ScResult r;
  (void)k;
  if (groups.empty()) {
    r.reason = "all_unparsed";
    return r;
  }
  const auto best = std::min_element(groups.begin(), groups.end(), [](const VoteGroup& a, const VoteGroup& b) {
    if (a.votes != b.votes) return a.votes > b.votes;
    return a.first_index < b.first_index;
  });
  r.votes = best->votes;
  r.value = CanonValue::from_text(best->output);
  r.accepted = best->votes >= min_votes;
  if (!r.accepted) r.reason = "below_floor";
  r.groups = std::move(groups);
  return r;
}

UtGenerator::UtGenerator(Gateway& gateway, const SubjectRunner& runner, GenStrategy strategy)
    : gateway_(gateway), runner_(runner), strategy_(std::move(strategy)) {
  strategy_.validate();
}

Origin UtGenerator::origin() const {
  switch (strategy_.kind) {
    case StrategyKind::random: return Origin::generated_random;
    case StrategyKind::prompted: return Origin::generated_prompted;
    case StrategyKind::utgen: return Origin::generated_utgen;
    case StrategyKind::oracle: return Origin::oracle;
  }
  return Origin::generated_prompted;
}

std::vector<Message> UtGenerator::input_prompt(const Problem& problem, const CandidateCode* buggy) const {
  if (strategy_.kind == StrategyKind::random) {
    return prompts::render(prompts::TemplateName::random_ut_input, prompts::problem_bindings(problem, problem.signature));
  }
  return prompts::render(prompts::TemplateName::utgen_failing, prompts::problem_bindings(problem, buggy->source));
}

std::vector<Message> UtGenerator::output_prompt(const Problem& problem, const CandidateCode* buggy,
                                                const std::vector<std::string>& args) const {
  const std::string_view code = strategy_.kind == StrategyKind::random || !buggy
                                    ? std::string_view(problem.signature)
                                    : std::string_view(buggy->source);
  auto messages = prompts::render(prompts::TemplateName::utgen_failing, prompts::problem_bindings(problem, code));
  std::string prefix = "## Unit Test\n\n### Input Arguments\n\nArguments: ";
  prefix += problem.entry_point + "(" + join_args(args) + ")\n\n### Output\n\n";
  messages.push_back({"assistant", std::move(prefix)});
  return messages;
}

std::vector<std::string> UtGenerator::sample_input(const Problem& problem, const CandidateCode* buggy,
                                                   const std::string& context, int slot) {
  if (strategy_.kind == StrategyKind::random && buggy) {
    throw ConfigError("random strategy must not see the target code");
  }
  if ((strategy_.kind == StrategyKind::prompted || strategy_.kind == StrategyKind::utgen) && !buggy) {
    throw ConfigError("prompted/utgen strategies need the target code");
  }
  if (strategy_.kind == StrategyKind::oracle) throw ConfigError("oracle strategy does not sample inputs");
  const auto messages = input_prompt(problem, buggy);
  input_calls_.fetch_add(1);
  for (int attempt = 0; attempt < strategy_.input_retries; ++attempt) {
    GenRequest req;
    req.messages = messages;
    req.temperature = strategy_.temperature;
    req.top_p = strategy_.top_p;
    req.model = strategy_.model;
    req.seed_tag = seed_tag("input", context, slot, attempt);
    input_requests_.fetch_add(1);
    const auto resp = gateway_.generate(std::move(req));
    try {
      auto parsed = prompts::parse_unit_test(resp.completions.front(), problem.entry_point);
      if (runner_.args_valid(parsed.args)) return std::move(parsed.args);
      log::debug("slot " + std::to_string(slot) + ": arguments do not evaluate");
    } catch (const ParseError& e) {
      log::debug("slot " + std::to_string(slot) + ": " + e.what());
    }
  }
  throw SlotFailed("no valid input after " + std::to_string(strategy_.input_retries) + " attempts");
}

ScResult UtGenerator::predict_output_sc(const Problem& problem, const CandidateCode* buggy,
                                        const std::vector<std::string>& args, const std::string& context, int slot) {
  GenRequest req;
  req.messages = output_prompt(problem, buggy, args);
  req.n_samples = strategy_.k;
  req.temperature = strategy_.temperature;
  req.top_p = strategy_.top_p;
  req.model = strategy_.model;
  req.seed_tag = seed_tag("output", context, slot);
  output_calls_.fetch_add(strategy_.k);
  const auto resp = gateway_.generate(std::move(req));

  std::vector<std::optional<std::string>> answers;
  bool any_float = false;
  for (const auto& c : resp.completions) {
    auto out = prompts::extract_output(c);
    if (out && literal::contains_float(*out)) any_float = true;
    answers.push_back(std::move(out));
  }
  SameOutput same;
  if (any_float) {
    same = [this](const std::string& a, const std::string& b) {
      if (!literal::contains_float(a) && !literal::contains_float(b)) return false;
      return runner_.literals_equal(a, b);
    };
  }
  return decide_votes(tally_votes(answers, same), strategy_.k, strategy_.min_votes());
}

struct UtGenerator::OracleCursor {
  std::vector<OracleRow> rows;  // evaluated prefix of the domain
  std::size_t attacking = 0;
  std::size_t valid_other = 0;
};

// Per problem: reference outputs by domain index and one cursor per code.
struct UtGenerator::OracleState {
  std::mutex mu;
  std::vector<std::optional<ExecOutcome>> reference;
  std::map<std::string, OracleCursor> cursors;
};

UtGenerator::~UtGenerator() = default;

UtGenerator::OracleState& UtGenerator::oracle_state(const Problem& problem) {
  if (!problem.reference_code) throw ConfigError("oracle strategy needs reference_code for " + problem.id);
  if (!problem.input_domain) throw ConfigError("oracle strategy needs input_domain for " + problem.id);
  std::lock_guard lock(oracle_mu_);
  auto& slot = oracle_states_[problem.id];
  if (!slot) {
    slot = std::make_unique<OracleState>();
    slot->reference.resize(problem.input_domain->size());
  }
  return *slot;
}

template <typename Done>
void UtGenerator::advance(OracleState& state, OracleCursor& cursor, const Problem& problem, const CandidateCode& code,
                          Done done) {
  const CandidateCode reference{*problem.reference_code, Provenance::sampled_model, std::nullopt};
  // Byte-identical code cannot diverge from the reference.
  const bool identical = literal::trim(code.source) == literal::trim(*problem.reference_code);
  const auto& domain = *problem.input_domain;
  while (cursor.rows.size() < domain.size() && !done(cursor, identical)) {
    const std::size_t i = cursor.rows.size();
    OracleRow row;
    row.args = domain[i];
    if (!state.reference[i]) {
      auto ref = runner_.call(reference, problem, row.args);
      if (ref.status == ExecStatus::infra_error) throw InfraError(ref.error_msg.value_or("infra_error"));
      state.reference[i] = std::move(ref);
    }
    const auto& ref = *state.reference[i];
    row.reference_ok = ref.status == ExecStatus::ok;
    if (row.reference_ok) {
      row.reference_value = ref.value->text;
      if (!identical) {
        UnitTest ut{row.args, *ref.value, std::nullopt, std::nullopt, Origin::oracle};
        const auto got = runner_.check(code, problem, ut);
        if (got.status == ExecStatus::infra_error) throw InfraError(got.error_msg.value_or("infra_error"));
        row.diverges = !got.passed();
      }
      ++(row.diverges ? cursor.attacking : cursor.valid_other);
    }
    cursor.rows.push_back(std::move(row));
  }
}

std::vector<OracleRow> UtGenerator::oracle_rows(const Problem& problem, const CandidateCode& code) {
  auto& state = oracle_state(problem);
  std::lock_guard lock(state.mu);
  auto& cursor = state.cursors[code.source];
  advance(state, cursor, problem, code, [](const OracleCursor&, bool) { return false; });
  return cursor.rows;
}

std::optional<UnitTest> UtGenerator::oracle_ut(const Problem& problem, const CandidateCode& buggy, int slot) {
  if (slot < 0) return std::nullopt;
  const auto want = static_cast<std::size_t>(slot);
  auto& state = oracle_state(problem);
  std::lock_guard lock(state.mu);
  auto& cursor = state.cursors[buggy.source];
  // Attacking inputs first, in domain order, then the remaining valid ones.
  // The fallback order is only final once the whole domain is known, unless
  // the code is the reference itself.
  advance(state, cursor, problem, buggy, [want](const OracleCursor& c, bool identical) {
    return c.attacking > want || (identical && c.valid_other > want);
  });
  const OracleRow* pick = nullptr;
  std::size_t seen = 0;
  for (const auto& r : cursor.rows) {
    if (r.reference_ok && r.diverges && seen++ == want) pick = &r;
  }
  if (!pick) {
    const std::size_t rest = want - cursor.attacking;
    seen = 0;
    for (const auto& r : cursor.rows) {
      if (want >= cursor.attacking && r.reference_ok && !r.diverges && seen++ == rest) pick = &r;
    }
  }
  if (!pick) return std::nullopt;
  return UnitTest{pick->args, CanonValue::from_text(pick->reference_value), std::nullopt, strategy_.k, Origin::oracle};
}

std::optional<UnitTest> UtGenerator::sample_ut(const Problem& problem, const CandidateCode& buggy,
                                               const std::string& context, int slot) {
  if (strategy_.kind == StrategyKind::oracle) return oracle_ut(problem, buggy, slot);
  const CandidateCode* target = strategy_.kind == StrategyKind::random ? nullptr : &buggy;
  std::vector<std::string> args;
  try {
    args = sample_input(problem, target, context, slot);
  } catch (const SlotFailed& e) {
    log::debug(problem.id + ": " + e.what());
    return std::nullopt;
  }
  const auto sc = predict_output_sc(problem, target, args, context, slot);
  if (!sc.accepted) {
    log::debug(problem.id + ": slot " + std::to_string(slot) + " rejected (" + sc.reason + ")");
    return std::nullopt;
  }
  return UnitTest{std::move(args), *sc.value, std::nullopt, sc.votes, origin()};
}

std::vector<UnitTest> UtGenerator::build_ut(const Problem& problem, const CandidateCode& buggy,
                                            const std::string& context) {
  std::vector<UnitTest> suite;
  std::unordered_set<std::string> keys;
  const int attempts = 3 * strategy_.n;
  for (int slot = 0; slot < attempts; ++slot) {
    auto ut = sample_ut(problem, buggy, context, slot);
    if (ut && keys.insert(dedup_key(*ut)).second) suite.push_back(std::move(*ut));
    if (static_cast<int>(suite.size()) >= strategy_.n) break;
  }
  return suite;
}

}  // namespace utdebug
