// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#include "utdebug/runner.hpp"

#include <algorithm>
#include <array>
#include <csignal>
#include <cstdlib>
#include <mutex>
#include <semaphore>
#include <thread>
#include <unordered_map>

#include "subprocess.hpp"

#ifndef UTDEBUG_HARNESS_PATH
#define UTDEBUG_HARNESS_PATH "harness/utd_harness.py"
#endif

namespace utdebug {

namespace {

constexpr std::array kStatusNames = {"ok", "exception", "timeout", "load_error", "arg_error", "infra_error"};

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

ExecOutcome infra(std::string msg, int duration_ms = 0) {
  ExecOutcome o;
  o.status = ExecStatus::infra_error;
  o.error_type = "infra_error";
  o.error_msg = std::move(msg);
  o.duration_ms = duration_ms;
  return o;
}

// Identity function used to compare two literals with harness equality.
constexpr const char* kIdentityCode = "def _utd_identity(x):\n    return x\n";
constexpr const char* kProbeCode = "def _utd_probe(*args):\n    return None\n";

}  // namespace

std::string_view to_string(ExecStatus s) { return kStatusNames[static_cast<std::size_t>(s)]; }

ExecStatus exec_status_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kStatusNames.size(); ++i) {
    if (s == kStatusNames[i]) return static_cast<ExecStatus>(i);
  }
  throw InfraError("unknown harness status: " + std::string(s));
}

std::string ExecOutcome::behavior() const {
  if (status == ExecStatus::ok && value) return value->text;
  if (error_type) return *error_type;
  return std::string(to_string(status));
}

Json HarnessRequest::to_json() const {
  Json j;
  j["mode"] = mode == HarnessMode::call ? "call" : "check";
  j["code"] = code;
  j["entry_point"] = entry_point;
  j["args_expr"] = args_expr;
  if (expected_expr) j["expected_expr"] = *expected_expr;
  j["timeout_ms"] = timeout_ms;
  j["float_abs_tol"] = float_abs_tol;
  j["float_rel_tol"] = float_rel_tol;
  return j;
}

ExecOutcome parse_harness_response(const std::string& stdout_text, HarnessMode mode) {
  const auto nl = stdout_text.find('\n');
  if (nl == std::string::npos || nl + 1 != stdout_text.size()) {
    throw InfraError("harness must print exactly one line");
  }
  Json j;
  try {
    j = Json::parse(stdout_text.substr(0, nl));
  } catch (const Json::exception& e) {
    throw InfraError(std::string("unparseable harness response: ") + e.what());
  }
  if (!j.is_object() || !j.contains("status") || !j["status"].is_string()) {
    throw InfraError("harness response without status");
  }
  ExecOutcome o;
  o.status = exec_status_from_string(j["status"].get<std::string>());
  if (o.status == ExecStatus::infra_error) throw InfraError("harness reported infra_error");
  if (j.contains("value_canon") && j["value_canon"].is_string()) {
    o.value = CanonValue::from_text(j["value_canon"].get<std::string>());
  }
  if (j.contains("equal") && j["equal"].is_boolean()) o.equal = j["equal"].get<bool>();
  if (j.contains("error_type") && j["error_type"].is_string()) o.error_type = j["error_type"].get<std::string>();
  if (j.contains("error_msg") && j["error_msg"].is_string()) o.error_msg = j["error_msg"].get<std::string>();
  if (j.contains("duration_ms") && j["duration_ms"].is_number_integer()) o.duration_ms = j["duration_ms"].get<int>();
  if (o.status == ExecStatus::ok && !o.value) throw InfraError("status ok without value_canon");
  const bool want_equal = mode == HarnessMode::check && o.status == ExecStatus::ok;
  if (want_equal != o.equal.has_value()) throw InfraError("equal present/absent against protocol");
  return o;
}

struct SubjectRunner::Shared {
  explicit Shared(int permits) : slots(permits) {}
  std::counting_semaphore<4096> slots;
  std::atomic<long> executions{0};
  std::mutex memo_mu;
  std::unordered_map<std::string, ExecOutcome> memo;
};

long SubjectRunner::executions() const { return shared_->executions.load(); }

std::string default_harness_path() { return env_or("UTD_HARNESS", UTDEBUG_HARNESS_PATH); }

SubjectRunner::SubjectRunner(RunnerConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.timeout_ms <= 0) throw ConfigError("timeout_ms must be positive");
  if (cfg_.max_parallel <= 0) cfg_.max_parallel = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (cfg_.max_parallel < 1) throw ConfigError("max_parallel must be >= 1");
  if (cfg_.harness_path.empty()) cfg_.harness_path = default_harness_path();
  if (cfg_.python.empty()) cfg_.python = env_or("UTD_PYTHON", "python3");
  std::signal(SIGPIPE, SIG_IGN);
  shared_ = std::make_shared<Shared>(std::min(cfg_.max_parallel, 4096));
}

HarnessRequest SubjectRunner::make_request(HarnessMode mode, const std::string& code, const std::string& entry,
                                           std::vector<std::string> args,
                                           std::optional<std::string> expected) const {
  HarnessRequest r;
  r.mode = mode;
  r.code = code;
  r.entry_point = entry;
  r.args_expr = std::move(args);
  r.expected_expr = std::move(expected);
  r.timeout_ms = cfg_.timeout_ms;
  r.float_abs_tol = cfg_.float_abs_tol;
  r.float_rel_tol = cfg_.float_rel_tol;
  return r;
}

ExecOutcome SubjectRunner::execute_once(const HarnessRequest& req) const {
  shared_->slots.acquire();
  struct Release {
    Shared* s;
    ~Release() { s->slots.release(); }
  } release{shared_.get()};
  shared_->executions.fetch_add(1);

  const auto deadline = std::chrono::milliseconds(req.timeout_ms + cfg_.kill_grace_ms);
  auto res = detail::run_process({cfg_.python, "-I", "-S", cfg_.harness_path}, req.to_json().dump(), deadline);
  const int elapsed = static_cast<int>(res.elapsed.count());
  if (!res.spawned) return infra("could not spawn harness", elapsed);
  if (res.killed_on_deadline) {
    ExecOutcome o;
    o.status = ExecStatus::timeout;
    o.error_type = "timeout";
    o.error_msg = "killed after " + std::to_string(req.timeout_ms) + " ms";
    o.duration_ms = elapsed;
    return o;
  }
  if (res.exit_code != 0) {
    return infra("harness exited with code " + std::to_string(res.exit_code) + " signal " +
                     std::to_string(res.term_signal) + ": " + res.err.substr(0, 512),
                 elapsed);
  }
  try {
    return parse_harness_response(res.out, req.mode);
  } catch (const InfraError& e) {
    return infra(e.what(), elapsed);
  }
}

ExecOutcome SubjectRunner::execute(const HarnessRequest& req) const {
  std::string key;
  if (cfg_.memoize) {
    key = req.to_json().dump();
    std::lock_guard lock(shared_->memo_mu);
    if (auto it = shared_->memo.find(key); it != shared_->memo.end()) return it->second;
  }
  auto out = execute_once(req);
  if (out.status == ExecStatus::infra_error) out = execute_once(req);
  if (cfg_.memoize && out.status != ExecStatus::infra_error && out.status != ExecStatus::timeout) {
    std::lock_guard lock(shared_->memo_mu);
    shared_->memo.emplace(std::move(key), out);
  }
  return out;
}

ExecOutcome SubjectRunner::call(const CandidateCode& code, const Problem& problem,
                                const std::vector<std::string>& args) const {
  return execute(make_request(HarnessMode::call, code.source, problem.entry_point, args, std::nullopt));
}

ExecOutcome SubjectRunner::check(const CandidateCode& code, const Problem& problem, const UnitTest& ut) const {
  return execute(make_request(HarnessMode::check, code.source, problem.entry_point, ut.args, ut.expected.text));
}

std::vector<ExecOutcome> SubjectRunner::run_suite(const CandidateCode& code, const Problem& problem,
                                                  const std::vector<UnitTest>& suite) const {
  std::vector<ExecOutcome> out(suite.size());
  const std::size_t workers = std::min<std::size_t>(suite.size(), static_cast<std::size_t>(cfg_.max_parallel));
  if (workers <= 1) {
    for (std::size_t i = 0; i < suite.size(); ++i) out[i] = check(code, problem, suite[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < suite.size(); i = next.fetch_add(1)) {
          out[i] = check(code, problem, suite[i]);
        }
      });
    }
  }
  return out;
}

double SubjectRunner::pass_rate(const CandidateCode& code, const Problem& problem,
                                const std::vector<UnitTest>& suite) const {
  if (suite.empty()) throw ConfigError("pass_rate over an empty suite");
  const auto outcomes = run_suite(code, problem, suite);
  std::size_t passed = 0;
  for (const auto& o : outcomes) {
    if (o.status == ExecStatus::infra_error) throw InfraError(o.error_msg.value_or("infra_error"));
    if (o.passed()) ++passed;
  }
  return static_cast<double>(passed) / static_cast<double>(suite.size());
}

bool SubjectRunner::loads(const std::string& source, const std::string& entry_point) const {
  // The harness loads code before evaluating arguments, so an unparseable
  // argument separates "loads" (arg_error) from "does not load".
  const auto o = execute(make_request(HarnessMode::call, source, entry_point, {"("}, std::nullopt));
  if (o.status == ExecStatus::infra_error) throw InfraError(o.error_msg.value_or("infra_error"));
  return o.status == ExecStatus::arg_error;
}

bool SubjectRunner::args_valid(const std::vector<std::string>& args) const {
  const auto o = execute(make_request(HarnessMode::call, kProbeCode, "_utd_probe", args, std::nullopt));
  if (o.status == ExecStatus::infra_error) throw InfraError(o.error_msg.value_or("infra_error"));
  return o.status != ExecStatus::arg_error;
}

bool SubjectRunner::literals_equal(const std::string& actual, const std::string& expected) const {
  const auto o = execute(make_request(HarnessMode::check, kIdentityCode, "_utd_identity", {actual}, expected));
  if (o.status == ExecStatus::infra_error) throw InfraError(o.error_msg.value_or("infra_error"));
  return o.passed();
}

}  // namespace utdebug
