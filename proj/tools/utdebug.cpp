// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

// utdebug: batch entry point for test generation, debugging, evaluation,
// reranking, SFT bootstrapping and corpus building.

#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "utdebug/core.hpp"
#include "utdebug/debug.hpp"
#include "utdebug/gateway.hpp"
#include "utdebug/log.hpp"
#include "utdebug/metrics.hpp"
#include "utdebug/parallel.hpp"
#include "utdebug/pipeline.hpp"
#include "utdebug/runner.hpp"
#include "utdebug/serialize.hpp"
#include "utdebug/testgen.hpp"

namespace fs = std::filesystem;
using namespace utdebug;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitFatal = 1;

struct Options {
  std::string command;
  std::string corpus;
  std::string out;
  std::string backend;
  std::string cache;
  std::string model;
  std::string edit_model;
  std::string strategy = "prompted";
  int n = 3;
  int k = 8;
  int rounds = 3;
  int runs = 3;
  std::uint64_t seed = 0;
  int jobs = 0;
  int timeout_ms = 5000;
  double temperature = 0.7;
  double top_p = 0.9;
  std::string regen = "on-accept";
  std::string feedback = "ut";
  std::string split = "fix";
  std::string pools;
  std::string harness;
};

Json options_json(const Options& o) {
  Json j;
  j["backend"] = o.backend;
  j["cache"] = o.cache;
  j["model"] = o.model;
  j["edit_model"] = o.edit_model;
  j["strategy"] = o.strategy;
  j["n"] = o.n;
  j["k"] = o.k;
  j["rounds"] = o.rounds;
  j["runs"] = o.runs;
  j["seed"] = o.seed;
  j["jobs"] = o.jobs;
  j["timeout_ms"] = o.timeout_ms;
  j["temperature"] = o.temperature;
  j["top_p"] = o.top_p;
  j["regen"] = o.regen;
  j["feedback"] = o.feedback;
  j["split"] = o.split;
  j["pools"] = o.pools;
  return j;
}

/// Per-item failures, written in corpus order.
class ErrorLog {
 public:
  explicit ErrorLog(std::size_t n) : slots_(n) {}
  void record(std::size_t index, const std::string& problem_id, const std::string& message) {
    std::lock_guard lock(mu_);
    slots_[index] = Json{{"problem_id", problem_id}, {"message", message}};
    log::error(problem_id + ": " + message);
  }
  bool failed(std::size_t index) const { return slots_[index].has_value(); }
  std::size_t count() const {
    std::size_t c = 0;
    for (const auto& s : slots_) c += s.has_value();
    return c;
  }
  std::string jsonl() const {
    std::string out;
    for (const auto& s : slots_) {
      if (s) out += s->dump() + "\n";
    }
    return out;
  }

 private:
  std::vector<std::optional<Json>> slots_;
  std::mutex mu_;
};

std::string safe_name(const std::string& id) {
  std::string out;
  for (const char c : id) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  }
  return out.empty() ? "_" : out;
}

std::string dump_pretty(const Json& j) { return j.dump(2) + "\n"; }

bool needs_model(const Options& o) {
  if (o.command == "build-corpus") return false;
  if (o.command == "debug" || o.command == "bootstrap-sft") return true;
  return o.strategy != "oracle";
}

std::shared_ptr<Gateway> make_gateway(const Options& o) {
  if (o.backend.empty()) {
    if (needs_model(o)) throw ConfigError("--backend is required (live, scripted:<fixture> or replay:<dir>)");
    // Commands that never sample still get a gateway that refuses politely.
    return std::make_shared<Gateway>(std::make_shared<FunctionBackend>([](const GenRequest&, int) -> std::vector<std::string> {
      throw ConfigError("no model backend configured");
    }));
  }
  std::shared_ptr<Backend> backend;
  std::optional<fs::path> cache_dir;
  if (!o.cache.empty()) cache_dir = o.cache;
  std::string model = o.model;
  if (o.backend == "live") {
    auto cfg = HttpBackendConfig::from_env();
    if (!o.model.empty()) cfg.model = o.model;
    model = cfg.model;
    backend = std::make_shared<HttpBackend>(cfg);
  } else if (o.backend.rfind("scripted:", 0) == 0) {
    backend = std::shared_ptr<Backend>(ScriptedBackend::from_file(o.backend.substr(9)));
  } else if (o.backend.rfind("replay:", 0) == 0) {
    cache_dir = o.backend.substr(7);
    if (!fs::is_directory(*cache_dir)) throw ConfigError("replay directory does not exist: " + cache_dir->string());
  } else {
    throw ConfigError("unknown backend: " + o.backend);
  }
  if (cache_dir) return std::make_shared<Gateway>(backend, *cache_dir, model);
  return std::make_shared<Gateway>(backend, model);
}

GenStrategy strategy_of(const Options& o) {
  GenStrategy s;
  s.kind = strategy_from_string(o.strategy);
  s.n = o.n;
  s.k = o.k;
  s.model = o.model;
  s.temperature = o.temperature;
  s.top_p = o.top_p;
  s.validate();
  return s;
}

SubjectRunner make_runner(const Options& o) {
  RunnerConfig rc;
  rc.timeout_ms = o.timeout_ms;
  rc.max_parallel = o.jobs;
  rc.harness_path = o.harness;
  if (!rc.harness_path.empty() && !fs::exists(rc.harness_path)) throw ConfigError("harness not found: " + o.harness);
  return SubjectRunner(rc);
}

// Stand-in target for the random strategy, which never reads it.
CandidateCode target_of(const Problem& p, StrategyKind kind) {
  if (!p.candidates.empty()) return p.candidates.front();
  if (kind == StrategyKind::random) return {p.signature, Provenance::sampled_model, std::nullopt};
  throw ConfigError("problem " + p.id + " has no candidate code");
}

std::map<std::string, CandidateCode> codes_of(const std::vector<Problem>& corpus, const std::vector<CandidateCode>& codes,
                                              const std::vector<char>& use) {
  std::map<std::string, CandidateCode> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (use[i]) out[corpus[i].id] = codes[i];
  }
  return out;
}

std::vector<Problem> with_gold(const std::vector<Problem>& corpus) {
  std::vector<Problem> out;
  for (const auto& p : corpus) {
    if (p.gold_tests && !p.gold_tests->empty()) out.push_back(p);
  }
  return out;
}

Json maybe_pass_at_1(const std::vector<Problem>& corpus, const std::vector<CandidateCode>& codes,
                     const SubjectRunner& runner, int jobs) {
  const auto gold = with_gold(corpus);
  if (gold.empty() || codes.size() != corpus.size()) return nullptr;
  std::vector<char> use(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) use[i] = corpus[i].gold_tests && !corpus[i].gold_tests->empty();
  return pass_at_1(gold, codes_of(corpus, codes, use), runner, jobs);
}

struct RunContext {
  const Options& opt;
  std::vector<Problem> corpus;
  fs::path out;
  int jobs;
};

int cmd_gen_uts(RunContext& ctx, Gateway& gateway, const SubjectRunner& runner) {
  const auto strategy = strategy_of(ctx.opt);
  UtGenerator gen(gateway, runner, strategy);
  ErrorLog errors(ctx.corpus.size());
  std::vector<Json> lines(ctx.corpus.size());
  parallel_for(ctx.corpus.size(), ctx.jobs, [&](std::size_t i) {
    const auto& p = ctx.corpus[i];
    try {
      const auto target = target_of(p, strategy.kind);
      const auto suite = gen.build_ut(p, target, p.id);
      Json tests = Json::array();
      for (const auto& ut : suite) tests.push_back(to_json(ut));
      lines[i] = Json{{"problem_id", p.id}, {"strategy", ctx.opt.strategy}, {"tests", std::move(tests)}};
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      errors.record(i, p.id, e.what());
    }
  });
  std::string text;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!errors.failed(i)) text += lines[i].dump() + "\n";
  }
  write_file_atomic(ctx.out / "suites.jsonl", text);
  write_file_atomic(ctx.out / "errors.jsonl", errors.jsonl());
  return 0;
}

int cmd_debug(RunContext& ctx, Gateway& gateway, const SubjectRunner& runner) {
  DebugConfig cfg;
  cfg.rounds = ctx.opt.rounds;
  cfg.strategy = strategy_of(ctx.opt);
  cfg.regen_policy = regen_from_string(ctx.opt.regen);
  cfg.feedback_style = feedback_from_string(ctx.opt.feedback);
  cfg.edit_model = ctx.opt.edit_model;
  cfg.temperature = ctx.opt.temperature;
  cfg.top_p = ctx.opt.top_p;
  Debugger debugger(gateway, runner, cfg);
  for (const auto& p : ctx.corpus) {
    if (p.candidates.empty()) throw ConfigError("problem " + p.id + " has no candidate code");
  }

  ErrorLog errors(ctx.corpus.size());
  std::vector<CandidateCode> finals(ctx.corpus.size());
  std::vector<std::optional<DebugTrace>> traces(ctx.corpus.size());
  fs::create_directories(ctx.out / "traces");
  parallel_for(ctx.corpus.size(), ctx.jobs, [&](std::size_t i) {
    const auto& p = ctx.corpus[i];
    finals[i] = p.candidates.front();
    try {
      auto trace = debugger.run(p, p.candidates.front());
      finals[i] = trace.final_code;
      write_file_atomic(ctx.out / "traces" / (safe_name(p.id) + ".json"), dump_pretty(trace_document(trace, cfg)));
      traces[i] = std::move(trace);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      errors.record(i, p.id, e.what());
    }
  });

  std::string finals_text;
  std::map<std::string, int> exits;
  int accepted = 0;
  for (std::size_t i = 0; i < ctx.corpus.size(); ++i) {
    Json line = to_json(finals[i]);
    line["problem_id"] = ctx.corpus[i].id;
    finals_text += line.dump() + "\n";
    if (traces[i]) {
      ++exits[traces[i]->exit_reason];
      for (const auto& r : traces[i]->rounds) accepted += r.accepted;
    }
  }
  std::vector<CandidateCode> initial;
  for (const auto& p : ctx.corpus) initial.push_back(p.candidates.front());
  Json summary;
  summary["problems"] = ctx.corpus.size();
  summary["errors"] = errors.count();
  summary["accepted_edits"] = accepted;
  summary["exit_reasons"] = exits;
  summary["initial_pass_at_1"] = maybe_pass_at_1(ctx.corpus, initial, runner, ctx.jobs);
  summary["final_pass_at_1"] = maybe_pass_at_1(ctx.corpus, finals, runner, ctx.jobs);
  write_file_atomic(ctx.out / "final_codes.jsonl", finals_text);
  write_file_atomic(ctx.out / "summary.json", dump_pretty(summary));
  write_file_atomic(ctx.out / "errors.jsonl", errors.jsonl());
  std::cout << "final pass@1: " << summary["final_pass_at_1"].dump() << " (initial "
            << summary["initial_pass_at_1"].dump() << ")\n";
  return 0;
}

int cmd_eval_intrinsic(RunContext& ctx, Gateway& gateway, const SubjectRunner& runner) {
  UtGenerator gen(gateway, runner, strategy_of(ctx.opt));
  const auto report = intrinsic(ctx.corpus, gen, runner, ctx.opt.runs, ctx.jobs);
  write_file_atomic(ctx.out / "report.json", dump_pretty(to_json(report)));
  write_file_atomic(ctx.out / "errors.jsonl", "");
  std::cout << format_table(report);
  return 0;
}

int cmd_rerank(RunContext& ctx, Gateway& gateway, const SubjectRunner& runner) {
  UtGenerator gen(gateway, runner, strategy_of(ctx.opt));
  ErrorLog errors(ctx.corpus.size());
  std::vector<CandidateCode> chosen(ctx.corpus.size());
  std::vector<Json> lines(ctx.corpus.size());
  for (const auto& p : ctx.corpus) {
    if (p.candidates.empty()) throw ConfigError("problem " + p.id + " has an empty candidate pool");
  }
  parallel_for(ctx.corpus.size(), ctx.jobs, [&](std::size_t i) {
    const auto& p = ctx.corpus[i];
    chosen[i] = p.candidates.front();
    try {
      const auto r = rerank_best_of_n(p, p.candidates, gen, runner);
      chosen[i] = p.candidates[r.index];
      lines[i] = Json{{"problem_id", p.id}, {"index", r.index}, {"scores", r.scores}, {"union_size", r.union_suite.size()}};
      if (r.warning) lines[i]["warning"] = *r.warning;
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      errors.record(i, p.id, e.what());
      lines[i] = Json{{"problem_id", p.id}, {"index", 0}, {"error", e.what()}};
    }
  });
  std::string text;
  for (const auto& l : lines) text += l.dump() + "\n";
  std::vector<CandidateCode> first;
  for (const auto& p : ctx.corpus) first.push_back(p.candidates.front());
  Json summary;
  summary["problems"] = ctx.corpus.size();
  summary["errors"] = errors.count();
  summary["first_candidate_pass_at_1"] = maybe_pass_at_1(ctx.corpus, first, runner, ctx.jobs);
  summary["selected_pass_at_1"] = maybe_pass_at_1(ctx.corpus, chosen, runner, ctx.jobs);
  write_file_atomic(ctx.out / "selections.jsonl", text);
  write_file_atomic(ctx.out / "summary.json", dump_pretty(summary));
  write_file_atomic(ctx.out / "errors.jsonl", errors.jsonl());
  std::cout << "best-of-N pass@1: " << summary["selected_pass_at_1"].dump() << "\n";
  return 0;
}

int cmd_bootstrap_sft(RunContext& ctx, Gateway& gateway, const SubjectRunner& runner) {
  BootstrapConfig cfg;
  cfg.model = ctx.opt.model;
  cfg.temperature = ctx.opt.temperature;
  cfg.top_p = ctx.opt.top_p;
  cfg.jobs = ctx.jobs;
  const auto result = bootstrap_sft(ctx.corpus, gateway, runner, cfg);
  std::string text;
  for (const auto& r : result.records) text += to_json(r).dump() + "\n";
  std::string errors;
  for (const auto& e : result.errors) errors += Json{{"problem_id", e.problem_id}, {"message", e.message}}.dump() + "\n";
  Json summary;
  summary["items"] = result.items;
  summary["filtered"] = result.filtered;
  summary["dropped_no_ut"] = result.dropped_no_ut;
  summary["errors"] = result.errors.size();
  summary["records"] = result.records.size();
  write_file_atomic(ctx.out / "sft.jsonl", text);
  write_file_atomic(ctx.out / "summary.json", dump_pretty(summary));
  write_file_atomic(ctx.out / "errors.jsonl", errors);
  std::cout << result.records.size() << " SFT records from " << result.items << " items\n";
  return 0;
}

int cmd_build_corpus(RunContext& ctx, const SubjectRunner& runner) {
  if (!ctx.opt.pools.empty()) {
    std::map<std::string, std::vector<CandidateCode>> pools;
    std::ifstream in(ctx.opt.pools);
    if (!in) throw ConfigError("cannot read pools: " + ctx.opt.pools);
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto j = Json::parse(line);
      auto& pool = pools[j.at("id").get<std::string>()];
      for (const auto& c : j.at("candidates")) pool.push_back(candidate_from_json(c));
    }
    for (auto& p : ctx.corpus) {
      if (auto it = pools.find(p.id); it != pools.end()) p.candidates = it->second;
    }
  }
  SplitSpec spec;
  spec.kind = split_from_string(ctx.opt.split);
  const auto result = build_debug_split(ctx.corpus, spec, ctx.opt.seed, runner, ctx.jobs);
  std::string dropped;
  double sum = 0.0;
  for (const auto& p : result.corpus) sum += p.initial_pass_rate.value_or(0.0);
  for (const auto& d : result.dropped) dropped += Json{{"problem_id", d.problem_id}, {"message", d.message}}.dump() + "\n";
  Json summary;
  summary["split"] = std::string(to_string(spec.kind));
  summary["kept"] = result.corpus.size();
  summary["dropped"] = result.dropped.size();
  summary["mean_initial_pass_rate"] = result.corpus.empty() ? Json(nullptr) : Json(sum / result.corpus.size());
  write_file_atomic(ctx.out / "corpus.jsonl", corpus_text(result.corpus));
  write_file_atomic(ctx.out / "summary.json", dump_pretty(summary));
  write_file_atomic(ctx.out / "errors.jsonl", dropped);
  std::cout << result.corpus.size() << " problems kept, " << result.dropped.size() << " dropped\n";
  return 0;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--corpus", o.corpus, "Input corpus (JSONL)")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "Output directory")->required();
  sub->add_option("--backend", o.backend, "live | scripted:<fixture> | replay:<dir>");
  sub->add_option("--cache", o.cache, "Record samples to this cache directory");
  sub->add_option("--model", o.model, "Model id for test generation");
  sub->add_option("--seed", o.seed, "Seed");
  sub->add_option("--jobs", o.jobs, "Concurrent problems (default: CPU count)")->check(CLI::NonNegativeNumber);
  sub->add_option("--timeout-ms", o.timeout_ms, "Per-execution timeout")->check(CLI::PositiveNumber);
  sub->add_option("--temperature", o.temperature, "Sampling temperature")->check(CLI::NonNegativeNumber);
  sub->add_option("--top-p", o.top_p, "Nucleus sampling mass");
  sub->add_option("--harness", o.harness, "Harness script path");
}

void add_strategy(CLI::App* sub, Options& o) {
  sub->add_option("--strategy", o.strategy, "Test generator")
      ->check(CLI::IsMember({"random", "prompted", "utgen", "oracle"}));
  sub->add_option("--n", o.n, "Tests per suite")->check(CLI::PositiveNumber);
  sub->add_option("--k", o.k, "Self-consistency samples")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"utdebug: unit-test generation and test-driven debugging"};
  app.set_version_flag("--version", std::string(engine_version()));
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen-uts", "Generate a test suite per problem");
  add_common(gen, o);
  add_strategy(gen, o);

  auto* dbg = app.add_subcommand("debug", "Debug each problem's first candidate");
  add_common(dbg, o);
  add_strategy(dbg, o);
  dbg->add_option("--rounds", o.rounds, "Debugging rounds")->check(CLI::PositiveNumber);
  dbg->add_option("--regen", o.regen, "Suite regeneration policy")->check(CLI::IsMember({"on-accept", "every-round"}));
  dbg->add_option("--feedback", o.feedback, "Feedback style")->check(CLI::IsMember({"ut", "no-ut"}));
  dbg->add_option("--edit-model", o.edit_model, "Model id for critiques and edits");

  auto* ev = app.add_subcommand("eval-intrinsic", "Attack rate, output accuracy and both");
  add_common(ev, o);
  add_strategy(ev, o);
  ev->add_option("--runs", o.runs, "Independent runs")->check(CLI::PositiveNumber);

  auto* rr = app.add_subcommand("rerank", "Best-of-N selection by generated tests");
  add_common(rr, o);
  add_strategy(rr, o);

  auto* sft = app.add_subcommand("bootstrap-sft", "Build SFT records from a source corpus");
  add_common(sft, o);

  auto* bc = app.add_subcommand("build-corpus", "Build a debugging split from candidate pools");
  add_common(bc, o);
  bc->add_option("--split", o.split, "fix | hard")->check(CLI::IsMember({"fix", "hard"}));
  bc->add_option("--pools", o.pools, "Candidate pools (JSONL of {id, candidates})")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  o.command = app.get_subcommands().front()->get_name();

  const auto started = std::chrono::steady_clock::now();
  try {
    RunContext ctx{o, read_corpus(o.corpus), fs::path(o.out),
                   o.jobs > 0 ? o.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))};
    auto runner = make_runner(o);
    auto gateway = make_gateway(o);
    fs::create_directories(ctx.out);

    int rc = 0;
    if (o.command == "gen-uts") rc = cmd_gen_uts(ctx, *gateway, runner);
    else if (o.command == "debug") rc = cmd_debug(ctx, *gateway, runner);
    else if (o.command == "eval-intrinsic") rc = cmd_eval_intrinsic(ctx, *gateway, runner);
    else if (o.command == "rerank") rc = cmd_rerank(ctx, *gateway, runner);
    else if (o.command == "bootstrap-sft") rc = cmd_bootstrap_sft(ctx, *gateway, runner);
    else rc = cmd_build_corpus(ctx, runner);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    Json manifest;
    manifest["command"] = o.command;
    manifest["config"] = options_json(o);
    manifest["corpus"] = o.corpus;
    manifest["out"] = o.out;
    manifest["seed"] = o.seed;
    manifest["engine_version"] = std::string(engine_version());
    manifest["wall_time_s"] = wall;
    manifest["cache_hit_ratio"] = gateway->cache_hit_ratio();
    write_file_atomic(ctx.out / "manifest.json", dump_pretty(manifest));
    return rc;
  } catch (const ConfigError& e) {
    std::cerr << "utdebug: configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "utdebug: " << e.what() << "\n";
    return kExitFatal;
  }
}
