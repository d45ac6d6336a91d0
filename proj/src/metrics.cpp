// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#include "utdebug/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_set>

#include "utdebug/log.hpp"
#include "utdebug/parallel.hpp"

namespace utdebug {

namespace {

CandidateCode reference_of(const Problem& p) { return {*p.reference_code, Provenance::sampled_model, std::nullopt}; }

void require_ok(const ExecOutcome& o) {
  if (o.status == ExecStatus::infra_error) throw InfraError(o.error_msg.value_or("infra_error"));
}

ProblemOutcome score_one(const Problem& p, UtGenerator& generator, const SubjectRunner& runner, int run) {
  ProblemOutcome out;
  out.problem_id = p.id;
  out.run = run;
  const auto& buggy = p.candidates.front();
  std::optional<UnitTest> ut;
  try {
    ut = generator.sample_ut(p, buggy, p.id + ":run" + std::to_string(run), 0);
  } catch (const ScriptExhausted&) {
    throw;
  } catch (const CacheMiss&) {
    throw;
  } catch (const GatewayError& e) {
    out.error = e.what();
    log::warn(p.id + ": " + e.what());
  }
  if (!ut) return out;
  out.generated = true;

  const auto reference = reference_of(p);
  const auto ref = runner.call(reference, p, ut->args);
  require_ok(ref);
  if (ref.status == ExecStatus::ok) {
    UnitTest truth{ut->args, *ref.value, std::nullopt, std::nullopt, Origin::oracle};
    const auto on_buggy = runner.check(buggy, p, truth);
    require_ok(on_buggy);
    out.attacked = !on_buggy.passed();
    const auto predicted = runner.check(reference, p, *ut);
    require_ok(predicted);
    out.out_correct = predicted.passed();
  }
  out.ut = std::move(ut);
  return out;
}

double percent(std::size_t hits, std::size_t total) {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

IntrinsicReport intrinsic(const std::vector<Problem>& corpus, UtGenerator& generator, const SubjectRunner& runner,
                          int runs, int jobs) {
  if (runs < 1) throw ConfigError("runs must be >= 1");
  for (const auto& p : corpus) {
    if (!p.reference_code) throw ConfigError("problem " + p.id + " has no reference_code");
    if (p.candidates.empty()) throw ConfigError("problem " + p.id + " has no candidate code");
  }
  std::vector<const Problem*> order;
  for (const auto& p : corpus) order.push_back(&p);
  std::sort(order.begin(), order.end(), [](const Problem* a, const Problem* b) { return a->id < b->id; });

  IntrinsicReport report;
  report.runs = runs;
  for (int run = 0; run < runs; ++run) {
    IntrinsicRun r;
    r.per_problem.resize(order.size());
    parallel_for(order.size(), jobs, [&](std::size_t i) { r.per_problem[i] = score_one(*order[i], generator, runner, run); });
    std::size_t attacked = 0, correct = 0, both = 0;
    for (const auto& o : r.per_problem) {
      attacked += o.attacked;
      correct += o.out_correct;
      both += o.attacked && o.out_correct;
    }
    r.attack_rate = percent(attacked, order.size());
    r.output_acc = percent(correct, order.size());
    r.acc_and_attack = percent(both, order.size());
    report.attack_rate += r.attack_rate;
    report.output_acc += r.output_acc;
    report.acc_and_attack += r.acc_and_attack;
    report.per_run.push_back(std::move(r));
  }
  report.attack_rate /= runs;
  report.output_acc /= runs;
  report.acc_and_attack /= runs;
  return report;
}

Json to_json(const IntrinsicReport& report) {
  Json j;
  j["attack_rate"] = report.attack_rate;
  j["output_acc"] = report.output_acc;
  j["acc_and_attack"] = report.acc_and_attack;
  j["runs"] = report.runs;
  Json runs = Json::array();
  for (const auto& r : report.per_run) {
    Json jr;
    jr["attack_rate"] = r.attack_rate;
    jr["output_acc"] = r.output_acc;
    jr["acc_and_attack"] = r.acc_and_attack;
    Json rows = Json::array();
    for (const auto& o : r.per_problem) {
      Json row;
      row["problem_id"] = o.problem_id;
      row["generated"] = o.generated;
      row["attacked"] = o.attacked;
      row["out_correct"] = o.out_correct;
      row["ut"] = o.ut ? to_json(*o.ut) : Json(nullptr);
      if (o.error) row["error"] = *o.error;
      rows.push_back(std::move(row));
    }
    jr["per_problem"] = std::move(rows);
    runs.push_back(std::move(jr));
  }
  j["per_run"] = std::move(runs);
  return j;
}

std::string format_table(const IntrinsicReport& report) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "%-8s %12s %12s %14s\n", "run", "attack", "output_acc", "acc&attack");
  out += line;
  for (std::size_t i = 0; i < report.per_run.size(); ++i) {
    const auto& r = report.per_run[i];
    std::snprintf(line, sizeof line, "%-8zu %12.2f %12.2f %14.2f\n", i + 1, r.attack_rate, r.output_acc,
                  r.acc_and_attack);
    out += line;
  }
  std::snprintf(line, sizeof line, "%-8s %12.2f %12.2f %14.2f\n", "mean", report.attack_rate, report.output_acc,
                report.acc_and_attack);
  out += line;
  return out;
}

double pass_at_1(const std::vector<Problem>& corpus, const std::map<std::string, CandidateCode>& codes,
                 const SubjectRunner& runner, int jobs) {
  if (corpus.empty()) throw ConfigError("pass@1 over an empty corpus");
  for (const auto& p : corpus) {
    if (!p.gold_tests || p.gold_tests->empty()) throw ConfigError("problem " + p.id + " has no gold tests");
    if (!codes.contains(p.id)) throw ConfigError("no code for problem " + p.id);
  }
  std::vector<char> solved(corpus.size(), 0);
  parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    const auto& p = corpus[i];
    solved[i] = runner.pass_rate(codes.at(p.id), p, *p.gold_tests) == 1.0;
  });
  return percent(static_cast<std::size_t>(std::count(solved.begin(), solved.end(), 1)), corpus.size());
}

RerankResult rerank_best_of_n(const Problem& problem, const std::vector<CandidateCode>& pool,
                              UtGenerator& generator, const SubjectRunner& runner, const std::string& context) {
  if (pool.empty()) throw ConfigError("rerank pool is empty for " + problem.id);
  RerankResult result;
  std::unordered_set<std::string> keys;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto ctx = (context.empty() ? problem.id : context) + ":pool" + std::to_string(i);
    for (auto& ut : generator.build_ut(problem, pool[i], ctx)) {
      if (keys.insert(dedup_key(ut)).second) result.union_suite.push_back(std::move(ut));
    }
  }
  result.scores.assign(pool.size(), 0);
  if (result.union_suite.empty()) {
    result.warning = "no generated tests; defaulting to the first candidate";
    log::warn(problem.id + ": " + *result.warning);
    return result;
  }
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (const auto& o : runner.run_suite(pool[i], problem, result.union_suite)) {
      require_ok(o);
      result.scores[i] += o.passed();
    }
  }
  result.index = static_cast<std::size_t>(std::max_element(result.scores.begin(), result.scores.end()) -
                                          result.scores.begin());
  return result;
}

OracleResult brute_force_oracle(const Problem& problem, const CandidateCode& buggy, const SubjectRunner& runner) {
  if (!problem.input_domain) throw OracleUnavailable("problem " + problem.id + " has no input domain");
  if (!problem.reference_code) throw OracleUnavailable("problem " + problem.id + " has no reference_code");
  const auto reference = reference_of(problem);
  OracleResult out;
  for (const auto& args : *problem.input_domain) {
    const auto ref = runner.call(reference, problem, args);
    require_ok(ref);
    if (ref.status != ExecStatus::ok) continue;
    const auto got = runner.call(buggy, problem, args);
    require_ok(got);
    bool same = false;
    if (got.status == ExecStatus::ok) {
      same = got.value->text == ref.value->text || runner.literals_equal(got.value->text, ref.value->text);
    }
    if (!same) out.attack_set.push_back(args);
  }
  out.true_attackable = !out.attack_set.empty();
  return out;
}

}  // namespace utdebug
