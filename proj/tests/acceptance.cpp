// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

// Acceptance checks. Prints one PASS/FAIL line per gating criterion and
// exits nonzero when any of them fails. The live smoke check only runs when
// UTD_API_BASE and UTD_MODEL are set and never gates.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "subprocess.hpp"
#include "utdebug/debug.hpp"
#include "utdebug/metrics.hpp"
#include "utdebug/pipeline.hpp"
#include "utdebug/prompts.hpp"
#include "utdebug/serialize.hpp"
#include "utdebug/testgen.hpp"

namespace fs = std::filesystem;
using namespace utdebug;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

const fs::path kTests = UTD_TEST_DIR;
const std::string kCli = UTD_CLI;

fs::path work_root() {
  static const fs::path root = [] {
    auto p = fs::temp_directory_path() / ("utd_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

RunnerConfig runner_config(bool memoize = true) {
  RunnerConfig cfg;
  cfg.harness_path = UTD_HARNESS;
  cfg.timeout_ms = 3000;
  cfg.memoize = memoize;
  return cfg;
}

const SubjectRunner& runner() {
  static SubjectRunner r(runner_config());
  return r;
}

std::vector<Problem> toy() { return read_corpus(kTests / "data" / "toy_corpus.jsonl"); }

std::shared_ptr<Backend> no_model() {
  return std::make_shared<FunctionBackend>([](const GenRequest& r, int) -> std::vector<std::string> {
    throw GatewayError("unexpected model call: " + r.seed_tag);
  });
}

GenStrategy oracle_strategy() {
  GenStrategy s;
  s.kind = StrategyKind::oracle;
  return s;
}

// Runs the CLI; returns its exit status. Output goes to <out>.log.
int cli(const std::string& args, const fs::path& out) {
  fs::create_directories(out.parent_path());
  const auto cmd = "'" + kCli + "' " + args + " --out '" + out.string() + "' --harness '" UTD_HARNESS "' > '" +
                   out.string() + ".log' 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Json read_json(const fs::path& p) { return Json::parse(read_file(p)); }

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

// ------------------------------------------------------------ criteria

Verdict metric_oracle_equivalence() {
  const auto out = work_root() / "intrinsic";
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = cli("eval-intrinsic --strategy oracle --corpus '" + (kTests / "data" / "toy_corpus.jsonl").string() + "'", out);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (rc != 0) return {false, "CLI exit " + std::to_string(rc)};
  const auto report = read_json(out / "report.json");
  const double a = report["attack_rate"], o = report["output_acc"], b = report["acc_and_attack"];
  if (a != 100.0 || o != 100.0 || b != 100.0) {
    return {false, "attack " + fmt(a) + " acc " + fmt(o) + " both " + fmt(b)};
  }
  std::map<std::string, bool> truth;
  for (const auto& p : toy()) truth[p.id] = brute_force_oracle(p, p.candidates[0], runner()).true_attackable;
  int mismatches = 0, rows = 0;
  for (const auto& run : report["per_run"]) {
    for (const auto& row : run["per_problem"]) {
      ++rows;
      if (row["attacked"].get<bool>() != truth.at(row["problem_id"].get<std::string>())) ++mismatches;
    }
  }
  if (mismatches || rows != 3 * static_cast<int>(truth.size())) {
    return {false, std::to_string(mismatches) + " attackability mismatches over " + std::to_string(rows) + " rows"};
  }
  if (secs >= 60.0) return {false, "runtime " + fmt(secs) + " s"};
  return {true, "100/100/100, " + std::to_string(rows) + " rows match brute force, " + fmt(secs) + " s"};
}

Verdict vote_math() {
  std::vector<std::string> completions(8);
  Gateway gw(std::make_shared<FunctionBackend>([&](const GenRequest&, int) { return completions; }));
  GenStrategy s;
  s.k = 8;
  UtGenerator gen(gw, runner(), s);
  Problem p;
  p.id = "votes";
  p.entry_point = "f";
  p.signature = "def f(x):";
  const CandidateCode code{"def f(x):\n    return x\n", Provenance::sampled_model, std::nullopt};
  int cases = 0, wrong = 0;
  // Symbol 0 is unparseable in the second alphabet.
  for (int lo : {1, 0}) {
    for (int c = 0; c < 6561; ++c) {
      std::vector<int> seq(8);
      for (int i = 0, x = c; i < 8; ++i, x /= 3) seq[i] = lo + x % 3;
      std::map<int, int> count, first;
      for (int i = 0; i < 8; ++i) {
        completions[i] = seq[i] ? "Output: " + std::to_string(seq[i]) : "no answer";
        if (seq[i] && !count[seq[i]]++) first[seq[i]] = i;
      }
      int mode = -1;
      for (const auto& [v, n] : count) {
        if (mode < 0 || n > count[mode] || (n == count[mode] && first[v] < first[mode])) mode = v;
      }
      const auto r = gen.predict_output_sc(p, &code, {"1"}, "votes", c);
      const bool want_accept = mode > 0 && count[mode] >= 4;
      bool ok = r.accepted == want_accept;
      if (mode > 0) ok = ok && r.value && r.value->text == std::to_string(mode);
      wrong += !ok;
      ++cases;
    }
  }
  return {wrong == 0, std::to_string(cases - wrong) + "/" + std::to_string(cases) + " sequences"};
}

Verdict backtracking_monotonicity() {
  Problem p;
  p.id = "dbl";
  p.entry_point = "dbl";
  p.signature = "def dbl(x):";
  p.description = "Return 2 * x.";
  const std::vector<std::string> variants = {
      "def dbl(x):\n    return 2 * x\n",         "def dbl(x):\n    return x + x if x > 2 else 0\n",
      "def dbl(x):\n    return 2 * x if x % 2 else x\n", "def dbl(x):\n    return 0\n",
      "def dbl(x):\n    raise ValueError(x)\n",  "def dbl(x):\n    return 2 * x if x < 7 else -1\n", ""};
  auto ut = [](int x) {
    return UnitTest{{std::to_string(x)}, CanonValue::from_text(std::to_string(2 * x)), std::nullopt, std::nullopt,
                    Origin::oracle};
  };
  std::mt19937 rng(4242);
  int violations = 0, rounds = 0;
  for (int run = 0; run < 200; ++run) {
    Gateway gw(std::make_shared<FunctionBackend>([&](const GenRequest&, int) {
      const auto& v = variants[rng() % variants.size()];
      return std::vector<std::string>{v.empty() ? "no idea" : prompts::fence(v)};
    }));
    DebugConfig cfg;
    cfg.rounds = 1 + static_cast<int>(rng() % 4);
    cfg.regen_policy = rng() % 2 ? RegenPolicy::on_accept : RegenPolicy::every_round;
    Debugger dbg(gw, runner(), cfg, [&](const Problem&, const CandidateCode&, const std::string&) {
      std::vector<UnitTest> suite;
      for (int i = 0, n = 1 + static_cast<int>(rng() % 4); i < n; ++i) suite.push_back(ut(static_cast<int>(rng() % 10)));
      return dedup(suite);
    });
    const CandidateCode initial{variants[1 + rng() % 5], Provenance::sampled_model, std::nullopt};
    const auto trace = dbg.debug(p, initial);
    const RoundRecord* prev = nullptr;
    for (const auto& r : trace.rounds) {
      ++rounds;
      int pass = 0;
      for (const auto& t : r.suite) pass += runner().check(r.code_after, p, t).passed();
      const double retained = static_cast<double>(pass) / static_cast<double>(r.suite.size());
      if (retained + 1e-12 < r.pre_pass) ++violations;
      if (r.accepted && !(r.post_pass > r.pre_pass)) ++violations;
      if (prev && prev->suite_version == r.suite_version && r.pre_pass + 1e-12 < prev->pre_pass) ++violations;
      prev = &r;
    }
  }
  return {violations == 0, std::to_string(violations) + " violations over 200 runs, " + std::to_string(rounds) + " rounds"};
}

Verdict fig3_fixture() {
  const auto out = work_root() / "fig3";
  const int rc = cli("debug --corpus '" + (kTests / "fixtures" / "fig3_corpus.jsonl").string() +
                         "' --backend 'scripted:" + (kTests / "fixtures" / "fig3.json").string() + "' --rounds 3",
                     out);
  if (rc != 0) return {false, "CLI exit " + std::to_string(rc)};
  const auto trace = read_json(out / "traces" / "fig3.json");
  std::vector<std::string> steps;
  for (const auto& r : trace["rounds"]) steps.push_back(r["accepted"].get<bool>() ? "accept" : "backtrack");
  const auto fixture = read_json(kTests / "fixtures" / "fig3.json");
  std::string round2;
  for (const auto& e : fixture["entries"]) {
    if (e.value("tag", "") == "edit") round2 = prompts::parse_code_block(e["completions"][1].get<std::string>()).source;
  }
  const bool ok = steps == std::vector<std::string>{"backtrack", "accept"} &&
                  trace["final_code"]["source"].get<std::string>() == round2;
  std::string seq;
  for (const auto& s : steps) seq += (seq.empty() ? "" : ",") + s;
  return {ok, "[" + seq + "], final code " + (trace["final_code"]["source"] == round2 ? "is" : "is not") +
                  " the round-2 edit"};
}

Verdict oracle_end_to_end() {
  const auto corpus = (kTests / "data" / "toy_corpus.jsonl").string();
  const auto fixer = (kTests / "fixtures" / "toy_fixer.json").string();
  const auto ut_out = work_root() / "e2e_ut";
  const auto no_out = work_root() / "e2e_nout";
  const std::string common = "debug --strategy oracle --corpus '" + corpus + "' --backend 'scripted:" + fixer + "'";
  if (int rc = cli(common, ut_out); rc != 0) return {false, "UT run exit " + std::to_string(rc)};
  if (int rc = cli(common + " --feedback no-ut", no_out); rc != 0) return {false, "no-UT run exit " + std::to_string(rc)};
  const double with_ut = read_json(ut_out / "summary.json")["final_pass_at_1"];
  const double without = read_json(no_out / "summary.json")["final_pass_at_1"];
  return {with_ut == 100.0 && without < with_ut,
          "pass@1 with UT feedback " + fmt(with_ut) + ", without " + fmt(without)};
}

Verdict early_exit_safety() {
  const auto corpus = toy();
  Gateway gw(no_model());
  int checked = 0, changed = 0;
  DebugConfig cfg;
  cfg.strategy = oracle_strategy();
  Debugger oracle_dbg(gw, runner(), cfg);
  for (const auto& p : corpus) {
    // Reference code under oracle tests, and buggy code under tests that
    // avoid its bug: both pass everything and must come back untouched.
    const CandidateCode ref{*p.reference_code + "\n", Provenance::human_bug, std::nullopt};
    const auto t1 = oracle_dbg.debug(p, ref);
    ++checked;
    changed += !(t1.final_code == ref && t1.rounds.empty() && t1.exit_reason == "all_pass");

    const auto attacks = brute_force_oracle(p, p.candidates[0], runner()).attack_set;
    std::vector<UnitTest> safe;
    for (const auto& args : *p.input_domain) {
      if (safe.size() == 3) break;
      if (std::find(attacks.begin(), attacks.end(), args) != attacks.end()) continue;
      const auto v = runner().call(CandidateCode{*p.reference_code, Provenance::sampled_model, std::nullopt}, p, args);
      if (v.status == ExecStatus::ok) safe.push_back({args, *v.value, std::nullopt, std::nullopt, Origin::oracle});
    }
    if (safe.empty()) continue;
    Debugger dbg(gw, runner(), {}, [&](const Problem&, const CandidateCode&, const std::string&) { return safe; });
    const auto t2 = dbg.debug(p, p.candidates[0]);
    ++checked;
    changed += !(t2.final_code == p.candidates[0] && t2.final_code.source == p.candidates[0].source &&
                 t2.edit_calls == 0 && t2.exit_reason == "all_pass");
  }
  return {changed == 0, std::to_string(checked - changed) + "/" + std::to_string(checked) + " returned byte-identical"};
}

Verdict reranker_oracle() {
  const auto corpus = toy();
  Gateway gw(no_model());
  UtGenerator gen(gw, runner(), oracle_strategy());
  std::mt19937 rng(50);
  int correct = 0, identical_ok = 0;
  for (int i = 0; i < 50; ++i) {
    const auto& p = corpus[static_cast<std::size_t>(i) % corpus.size()];
    const CandidateCode ref{*p.reference_code, Provenance::sampled_model, std::nullopt};
    std::vector<CandidateCode> pool;
    for (int n = 1 + static_cast<int>(rng() % 4); n > 0; --n) pool.push_back(p.candidates[0]);
    for (int n = 1 + static_cast<int>(rng() % 2); n > 0; --n) pool.push_back(ref);
    std::shuffle(pool.begin(), pool.end(), rng);
    const auto r = rerank_best_of_n(p, pool, gen, runner(), "pool" + std::to_string(i));
    correct += pool[r.index].source == ref.source;
  }
  for (int i = 0; i < 10; ++i) {
    const auto& p = corpus[static_cast<std::size_t>(i) * 2];
    const CandidateCode pick = i % 2 ? p.candidates[0] : CandidateCode{*p.reference_code, Provenance::sampled_model, std::nullopt};
    identical_ok += rerank_best_of_n(p, std::vector<CandidateCode>(3, pick), gen, runner()).index == 0;
  }
  return {correct == 50 && identical_ok == 10,
          std::to_string(correct) + "/50 pools pick a correct solution, " + std::to_string(identical_ok) +
              "/10 identical pools return index 0"};
}

Verdict sft_soundness() {
  const auto corpus = toy();
  auto run = [&] {
    Gateway gw(std::shared_ptr<Backend>(ScriptedBackend::from_file(kTests / "fixtures" / "toy_sft.json")));
    SubjectRunner fresh(runner_config(false));
    return bootstrap_sft(corpus, gw, fresh, {});
  };
  const auto first = run();
  const auto report = verify_sft(first.records, corpus, SubjectRunner(runner_config(false)));
  std::string a, b;
  for (const auto& r : first.records) a += to_json(r).dump() + "\n";
  for (const auto& r : run().records) b += to_json(r).dump() + "\n";
  const bool ok = !first.records.empty() && report.ok() && a == b;
  return {ok, std::to_string(report.passed) + "/" + std::to_string(report.checked) + " records verified, rerun " +
                  (a == b ? "byte-identical" : "differs")};
}

Verdict harness_protocol() {
  std::mt19937 rng(10000);
  const std::vector<std::string> good_code = {
      "def f(*a):\n    return list(a)\n",
      "def f(*a):\n    return {'n': len(a), 's': set(range(3))}\n",
      "def f(*a):\n    print('noise' * 1000)\n    import sys\n    sys.stderr.write('err')\n    return 1.5\n",
      "import os\ndef f(*a):\n    os.write(1, b'raw')\n    return None\n",
      "def f(*a):\n    raise ValueError('x' * 5000)\n",
      "def f(*a):\n    raise SystemExit(3)\n",
      "def f(*a):\n    raise KeyboardInterrupt\n",
      "def f(*a):\n    x = []\n    x.append(x)\n    return x\n",
      "def f(*a):\n    return (i for i in a)\n",
      "def f(*a):\n    return float('nan'), 10 ** 400\n",
      "def f(*a):\n    return f(*a)\n",
      "def f(*a):\n    import os\n    os._exit(0)\n",
      "def f(*a):\n    open('/tmp/utd_forbidden', 'w')\n",
      "def f(*a):\n    return bytes(range(256)).decode('latin-1')\n",
      "def f(a, b):\n    return a + b\n",
  };
  const std::vector<std::string> loops = {
      "def f(*a):\n    while True:\n        pass\n",
      "def f(*a):\n    x = 0\n    while True:\n        x += 1\n",
      "import time\ndef f(*a):\n    while True:\n        try:\n            time.sleep(0.05)\n        except BaseException:\n            pass\n",
  };
  const std::vector<std::string> literals = {"1", "-3", "[1, [2, 3]]", "'s, t'", "(1,)", "{'a': 1.5}", "None",
                                             "{1, 2}", "2.5e3", "float('inf')", "'\\u00e9'"};
  const std::vector<std::string> bad_literals = {"[1,", "undefined", "'open", "1 +", "}{", "lambda: (", "\x01\x02",
                                                 "__import__('nonexistent_mod')"};
  const std::set<std::string> statuses = {"ok", "exception", "timeout", "load_error", "arg_error"};
  auto pick = [&](const auto& v) { return v[rng() % v.size()]; };
  auto random_bytes = [&] {
    std::string s;
    for (int i = 0, n = static_cast<int>(rng() % 60); i < n; ++i) s += static_cast<char>(1 + rng() % 126);
    return s;
  };

  int bad = 0, timeouts = 0, late = 0;
  std::string first_problem;
  std::map<std::string, int> reasons;
  const int total = 10000;
  for (int i = 0; i < total; ++i) {
    Json req;
    req["mode"] = rng() % 2 ? "call" : "check";
    req["entry_point"] = "f";
    req["timeout_ms"] = 1000;
    req["float_abs_tol"] = 1e-6;
    req["float_rel_tol"] = 1e-6;
    Json args = Json::array();
    for (int a = 0, n = static_cast<int>(rng() % 3); a < n; ++a) args.push_back(pick(literals));
    const int kind = static_cast<int>(rng() % 100);
    bool is_loop = false;
    std::string raw;
    if (kind < 2) {
      is_loop = true;
      req["code"] = pick(loops);
      req["timeout_ms"] = 50 + static_cast<int>(rng() % 251);
    } else if (kind < 40) {
      req["code"] = pick(good_code);
    } else if (kind < 55) {
      auto c = pick(good_code);
      req["code"] = rng() % 2 ? c.substr(0, rng() % c.size()) : random_bytes();
    } else if (kind < 70) {
      args.push_back(pick(bad_literals));
      req["code"] = pick(good_code);
    } else if (kind < 80) {
      req["code"] = pick(good_code);
      req["entry_point"] = rng() % 2 ? "missing" : "";
    } else if (kind < 90) {
      // Malformed requests: wrong types, missing fields, not JSON at all.
      switch (rng() % 5) {
        case 0: raw = random_bytes(); break;
        case 1: raw = "[1, 2, 3]"; break;
        case 2: req["timeout_ms"] = -5; break;
        case 3: req["args_expr"] = 7; break;
        default: req.erase("entry_point");
      }
      req["code"] = pick(good_code);
    } else {
      req["code"] = pick(good_code);
    }
    if (!req.contains("args_expr")) req["args_expr"] = args;
    bool rejected_early = req["mode"] == "check";
    if (req["mode"] == "check" && rng() % 10) {
      rejected_early = rng() % 4 == 0;
      req["expected_expr"] = rejected_early ? pick(bad_literals) : pick(literals);
    }
    const std::string input = raw.empty() ? req.dump(-1, ' ', false, Json::error_handler_t::replace) : raw;
    const int timeout_ms = req["timeout_ms"].is_number_integer() ? std::max(1, req["timeout_ms"].get<int>()) : 1000;

    const auto res = detail::run_process({"python3", "-I", "-S", UTD_HARNESS}, input,
                                         std::chrono::milliseconds(timeout_ms + 5000));
    std::string why;
    Json resp;
    if (!res.spawned || res.killed_on_deadline) {
      why = "no response before deadline";
    } else if (res.out.empty() || res.out.back() != '\n' || res.out.find('\n') != res.out.size() - 1) {
      why = "not exactly one line";
    } else {
      try {
        resp = Json::parse(res.out);
        if (!resp.is_object() || !resp.contains("status") || !statuses.contains(resp["status"].get<std::string>()) ||
            !resp.contains("duration_ms")) {
          why = "bad response fields";
        }
      } catch (const std::exception&) {
        why = "unparseable response";
      }
    }
    if (why.empty() && is_loop) {
      ++timeouts;
      const char* want = rejected_early ? "arg_error" : "timeout";
      if (resp["status"] != want) why = std::string("loop returned ") + resp["status"].get<std::string>() + ", want " + want;
      if (res.elapsed.count() > timeout_ms + 500) {
        ++late;
        why = "timeout took " + std::to_string(res.elapsed.count()) + " ms";
      }
    }
    if (!why.empty()) {
      ++bad;
      ++reasons[why.substr(0, why.find(' ', why.find(' ') + 1))];
      if (first_problem.empty()) first_problem = "request " + std::to_string(i) + ": " + why;
    }
  }
  std::string breakdown;
  for (const auto& [r, n] : reasons) breakdown += "; " + r + " x" + std::to_string(n);
  return {bad == 0, std::to_string(total - bad) + "/" + std::to_string(total) + " well-formed responses, " +
                        std::to_string(timeouts) + " timeout requests, " + std::to_string(late) + " late" +
                        (first_problem.empty() ? "" : "; first problem: " + first_problem) + breakdown};
}

Verdict split_builder() {
  auto band = [](const std::string& id, const std::vector<int>& ks) {
    Problem p;
    p.id = id;
    p.entry_point = "f";
    p.signature = "def f(x):";
    p.gold_tests.emplace();
    for (int x = 0; x < 20; ++x) {
      p.gold_tests->push_back({{std::to_string(x)}, CanonValue::from_text(std::to_string(x)), std::nullopt,
                               std::nullopt, Origin::gold});
    }
    for (int k : ks) {
      p.candidates.push_back({"def f(x):\n    return x if x < " + std::to_string(k) + " else -1\n",
                              Provenance::sampled_model, std::nullopt});
    }
    return p;
  };
  std::vector<Problem> problems;
  for (int i = 0; i < 8; ++i) problems.push_back(band("band" + std::to_string(i), {0, 9, 10, 11, 19, 20}));
  problems.push_back(band("outside", {9, 20}));
  SplitSpec hard;
  hard.kind = SplitKind::fix_hard;
  const SplitSpec fix;
  int out_of_band = 0, not_fix = 0, unstable = 0, wrong_drop = 0;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto h = build_debug_split(problems, hard, seed, runner());
    const auto again = build_debug_split(problems, hard, seed, runner());
    unstable += corpus_text(h.corpus) != corpus_text(again.corpus);
    wrong_drop += !(h.dropped.size() == 1 && h.dropped[0].problem_id == "outside");
    for (const auto& p : h.corpus) {
      // Independent rate: one check per gold test.
      int pass = 0;
      for (const auto& t : *p.gold_tests) pass += runner().check(p.candidates[0], p, t).passed();
      const double rate = pass / 20.0;
      out_of_band += !(rate >= 0.50 && rate <= 0.95) || rate != *p.initial_pass_rate;
      not_fix += !fix.eligible(rate);
    }
  }
  const bool ok = !out_of_band && !not_fix && !unstable && !wrong_drop;
  return {ok, std::to_string(out_of_band) + " out of band, " + std::to_string(not_fix) + " not fix-eligible, " +
                  std::to_string(unstable) + " unstable rebuilds over 25 seeds"};
}

// Every file under `dir` except manifest.json and CLI logs, by relative path.
std::map<std::string, std::string> output_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir).string();
    if (rel == "manifest.json") {
      auto j = read_json(e.path());
      j.erase("wall_time_s");
      j.erase("out");
      j["config"].erase("backend");
      j["config"].erase("cache");
      out[rel] = j.dump();
    } else {
      out[rel] = read_file(e.path());
    }
  }
  return out;
}

Verdict replay_determinism() {
  const auto fig3 = (kTests / "fixtures" / "fig3_corpus.jsonl").string();
  const auto fig3_script = (kTests / "fixtures" / "fig3.json").string();
  const auto toy_corpus = (kTests / "data" / "toy_corpus.jsonl").string();
  const auto sft_script = (kTests / "fixtures" / "toy_sft.json").string();
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen-uts", "gen-uts --corpus '" + fig3 + "'|" + fig3_script},
      {"debug", "debug --corpus '" + fig3 + "'|" + fig3_script},
      {"eval-intrinsic", "eval-intrinsic --runs 2 --corpus '" + fig3 + "'|" + fig3_script},
      {"rerank", "rerank --corpus '" + fig3 + "'|" + fig3_script},
      {"bootstrap-sft", "bootstrap-sft --corpus '" + toy_corpus + "'|" + sft_script},
  };
  int same = 0;
  std::string problems;
  for (const auto& [name, spec] : commands) {
    const auto bar = spec.find('|');
    const auto args = spec.substr(0, bar);
    const auto script = spec.substr(bar + 1);
    const auto base = work_root() / "replay" / name;
    const auto cache = base / "cache";
    const int rc0 = cli(args + " --backend 'scripted:" + script + "' --cache '" + cache.string() + "'", base / "record");
    const int rc1 = cli(args + " --backend 'replay:" + cache.string() + "'", base / "replay1");
    const int rc2 = cli(args + " --backend 'replay:" + cache.string() + "'", base / "replay2");
    if (rc0 || rc1 || rc2) {
      problems += " " + name + ": exit codes " + std::to_string(rc0) + "/" + std::to_string(rc1) + "/" + std::to_string(rc2);
      continue;
    }
    const auto r0 = output_files(base / "record"), r1 = output_files(base / "replay1"),
               r2 = output_files(base / "replay2");
    auto without_manifest = [](auto m) {
      m.erase("manifest.json");
      return m;
    };
    const auto m1 = read_json(base / "replay1" / "manifest.json");
    if (r1 == r2 && without_manifest(r0) == without_manifest(r1) && m1["cache_hit_ratio"] == 1.0) {
      ++same;
    } else {
      problems += " " + name + ": outputs differ";
    }
  }
  return {same == static_cast<int>(commands.size()),
          std::to_string(same) + "/" + std::to_string(commands.size()) + " commands byte-identical under replay" +
              (problems.empty() ? "" : ";" + problems)};
}

std::optional<Verdict> live_smoke() {
  const char* base = std::getenv("UTD_API_BASE");
  const char* model = std::getenv("UTD_MODEL");
  if (!base || !*base || !model || !*model) return std::nullopt;
  auto corpus = toy();
  corpus.resize(10);
  const auto path = work_root() / "live_corpus.jsonl";
  write_file_atomic(path, corpus_text(corpus));
  const auto out = work_root() / "live";
  const int rc = cli("eval-intrinsic --strategy prompted --runs 1 --backend live --corpus '" + path.string() + "'", out);
  if (rc != 0) return Verdict{false, "CLI exit " + std::to_string(rc)};
  const auto r = read_json(out / "report.json");
  const double a = r["attack_rate"], o = r["output_acc"], b = r["acc_and_attack"];
  return Verdict{b <= std::min(a, o), "attack " + fmt(a) + " acc " + fmt(o) + " both " + fmt(b)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::set<std::string> only(argv + 1, argv + argc);
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"metric_oracle_equivalence", metric_oracle_equivalence},
      {"vote_math", vote_math},
      {"backtracking_monotonicity", backtracking_monotonicity},
      {"fig3_fixture", fig3_fixture},
      {"oracle_end_to_end", oracle_end_to_end},
      {"early_exit_safety", early_exit_safety},
      {"reranker_oracle", reranker_oracle},
      {"sft_soundness", sft_soundness},
      {"harness_protocol", harness_protocol},
      {"split_builder", split_builder},
      {"replay_determinism", replay_determinism},
  };
  int failed = 0, ran = 0;
  for (const auto& [name, check] : criteria) {
    if (!only.empty() && !only.contains(name)) continue;
    ++ran;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !v.pass;
    std::printf("%s %s: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  try {
    if (const auto v = live_smoke()) {
      std::printf("%s live_smoke (not gating): %s\n", v->pass ? "PASS" : "FAIL", v->detail.c_str());
    } else {
      std::printf("SKIP live_smoke (not gating): UTD_API_BASE/UTD_MODEL not set\n");
    }
  } catch (const std::exception& e) {
    std::printf("FAIL live_smoke (not gating): threw: %s\n", e.what());
  }
  if (!failed) fs::remove_all(work_root());
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed ? 1 : 0;
}
