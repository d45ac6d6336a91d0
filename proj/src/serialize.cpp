// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#include "utdebug/serialize.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

namespace utdebug {

Json to_json(const UnitTest& ut) {
  Json j;
  j["args"] = ut.args;
  j["expected"] = ut.expected.text;
  if (ut.rationale) j["rationale"] = *ut.rationale;
  if (ut.votes) j["votes"] = *ut.votes;
  j["origin"] = std::string(to_string(ut.origin));
  return j;
}

Json to_json(const CandidateCode& code) {
  Json j;
  j["source"] = code.source;
  j["provenance"] = std::string(to_string(code.provenance));
  if (code.round) j["round"] = *code.round;
  return j;
}

Json to_json(const Problem& p) {
  Json j;
  j["id"] = p.id;
  j["description"] = p.description;
  j["entry_point"] = p.entry_point;
  j["signature"] = p.signature;
  j["reference_code"] = p.reference_code ? Json(*p.reference_code) : Json(nullptr);
  if (p.gold_tests) {
    Json tests = Json::array();
    for (const auto& ut : *p.gold_tests) tests.push_back({{"args", ut.args}, {"expected", ut.expected.text}});
    j["gold_tests"] = std::move(tests);
  } else {
    j["gold_tests"] = nullptr;
  }
  Json cands = Json::array();
  for (const auto& c : p.candidates) {
    cands.push_back({{"source", c.source}, {"provenance", std::string(to_string(c.provenance))}});
  }
  j["candidates"] = std::move(cands);
  if (!p.source_tag.empty()) j["source_tag"] = p.source_tag;
  if (p.input_domain) j["input_domain"] = *p.input_domain;
  if (p.initial_pass_rate) j["initial_pass_rate"] = *p.initial_pass_rate;
  if (p.initial_verdicts) j["initial_verdicts"] = *p.initial_verdicts;
  return j;
}

Json to_json(const RoundRecord& r) {
  Json j;
  j["round"] = r.round;
  j["suite_version"] = r.suite_version;
  Json suite = Json::array();
  for (const auto& ut : r.suite) suite.push_back(to_json(ut));
  j["suite"] = std::move(suite);
  j["failing_used"] = r.failing_used ? to_json(*r.failing_used) : Json(nullptr);
  j["pre_pass"] = r.pre_pass;
  j["post_pass"] = r.post_pass;
  j["accepted"] = r.accepted;
  j["validated"] = r.validated;
  j["code_after"] = to_json(r.code_after);
  j["feedback"] = r.feedback;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

Json to_json(const DebugTrace& t) {
  Json j;
  j["problem_id"] = t.problem_id;
  j["initial_code"] = to_json(t.initial_code);
  Json rounds = Json::array();
  for (const auto& r : t.rounds) rounds.push_back(to_json(r));
  j["rounds"] = std::move(rounds);
  j["final_code"] = to_json(t.final_code);
  j["exit_reason"] = t.exit_reason;
  j["exit_round"] = t.exit_round;
  Json suite = Json::array();
  for (const auto& ut : t.exit_suite) suite.push_back(to_json(ut));
  j["exit_suite"] = std::move(suite);
  j["warnings"] = t.warnings;
  j["edit_calls"] = t.edit_calls;
  j["suite_builds"] = t.suite_builds;
  return j;
}

Json to_json(const SftRecord& r) {
  Json j;
  j["prompt"] = r.prompt;
  j["completion"] = r.completion;
  j["problem_id"] = r.problem_id;
  j["buggy_code"] = r.buggy_code.source;
  j["ut_args"] = r.unit_test.args;
  j["ut_expected"] = r.unit_test.expected.text;
  return j;
}

UnitTest unit_test_from_json(const Json& j, Origin origin) {
  UnitTest ut;
  ut.args = j.at("args").get<std::vector<std::string>>();
  ut.expected = CanonValue::from_text(j.at("expected").get<std::string>());
  if (j.contains("rationale") && j["rationale"].is_string()) ut.rationale = j["rationale"].get<std::string>();
  if (j.contains("votes") && j["votes"].is_number_integer()) ut.votes = j["votes"].get<int>();
  ut.origin = j.contains("origin") ? origin_from_string(j["origin"].get<std::string>()) : origin;
  return ut;
}

CandidateCode candidate_from_json(const Json& j) {
  CandidateCode c;
  c.source = j.at("source").get<std::string>();
  c.provenance = j.contains("provenance") ? provenance_from_string(j["provenance"].get<std::string>())
                                          : Provenance::sampled_model;
  if (j.contains("round") && j["round"].is_number_integer()) c.round = j["round"].get<int>();
  return c;
}

Problem problem_from_json(const Json& j) {
  Problem p;
  p.id = j.at("id").get<std::string>();
  p.description = j.at("description").get<std::string>();
  p.entry_point = j.at("entry_point").get<std::string>();
  p.signature = j.at("signature").get<std::string>();
  if (j.contains("reference_code") && j["reference_code"].is_string()) {
    p.reference_code = j["reference_code"].get<std::string>();
  }
  if (j.contains("gold_tests") && j["gold_tests"].is_array()) {
    std::vector<UnitTest> tests;
    for (const auto& t : j["gold_tests"]) tests.push_back(unit_test_from_json(t, Origin::gold));
    p.gold_tests = std::move(tests);
  }
  if (j.contains("candidates") && j["candidates"].is_array()) {
    for (const auto& c : j["candidates"]) p.candidates.push_back(candidate_from_json(c));
  }
  if (j.contains("source_tag") && j["source_tag"].is_string()) p.source_tag = j["source_tag"].get<std::string>();
  if (j.contains("input_domain") && j["input_domain"].is_array()) {
    p.input_domain = j["input_domain"].get<std::vector<std::vector<std::string>>>();
  }
  if (j.contains("initial_pass_rate") && j["initial_pass_rate"].is_number()) {
    p.initial_pass_rate = j["initial_pass_rate"].get<double>();
  }
  if (j.contains("initial_verdicts") && j["initial_verdicts"].is_array()) {
    p.initial_verdicts = j["initial_verdicts"].get<std::vector<bool>>();
  }
  return p;
}

namespace {

RoundRecord round_from_json(const Json& j) {
  RoundRecord r;
  r.round = j.at("round").get<int>();
  r.suite_version = j.value("suite_version", 0);
  for (const auto& t : j.at("suite")) r.suite.push_back(unit_test_from_json(t));
  if (j.contains("failing_used") && !j["failing_used"].is_null()) r.failing_used = unit_test_from_json(j["failing_used"]);
  r.pre_pass = j.at("pre_pass").get<double>();
  r.post_pass = j.at("post_pass").get<double>();
  r.accepted = j.at("accepted").get<bool>();
  r.validated = j.value("validated", true);
  r.feedback = j.value("feedback", "");
  r.code_after = candidate_from_json(j.at("code_after"));
  r.note = j.value("note", "");
  return r;
}

}  // namespace

DebugTrace trace_from_json(const Json& j) {
  DebugTrace t;
  t.problem_id = j.at("problem_id").get<std::string>();
  t.initial_code = candidate_from_json(j.at("initial_code"));
  for (const auto& r : j.at("rounds")) t.rounds.push_back(round_from_json(r));
  t.final_code = candidate_from_json(j.at("final_code"));
  t.exit_reason = j.value("exit_reason", "");
  t.exit_round = j.value("exit_round", 0);
  if (j.contains("exit_suite")) {
    for (const auto& u : j["exit_suite"]) t.exit_suite.push_back(unit_test_from_json(u));
  }
  if (j.contains("warnings")) t.warnings = j["warnings"].get<std::vector<std::string>>();
  t.edit_calls = j.value("edit_calls", 0);
  t.suite_builds = j.value("suite_builds", 0);
  return t;
}

std::vector<Problem> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read corpus: " + path.string());
  std::vector<Problem> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto p = problem_from_json(Json::parse(line));
      validate(p);
      out.push_back(std::move(p));
    } catch (const Json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string corpus_text(const std::vector<Problem>& problems) {
  std::string out;
  for (const auto& p : problems) {
    out += to_json(p).dump();
    out += '\n';
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace utdebug
