// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "utdebug/core.hpp"
#include "utdebug/runner.hpp"
#include "utdebug/serialize.hpp"

namespace utdebug::support {

inline std::filesystem::path test_dir() { return UTD_TEST_DIR; }
inline std::filesystem::path toy_corpus_path() { return test_dir() / "data" / "toy_corpus.jsonl"; }
inline std::filesystem::path fixture(const std::string& name) { return test_dir() / "fixtures" / name; }

inline std::vector<Problem> toy_corpus() { return read_corpus(toy_corpus_path()); }

inline RunnerConfig runner_config(int timeout_ms = 3000, bool memoize = true) {
  RunnerConfig cfg;
  cfg.harness_path = UTD_HARNESS;
  cfg.timeout_ms = timeout_ms;
  cfg.memoize = memoize;
  return cfg;
}

inline Problem find_problem(const std::vector<Problem>& corpus, const std::string& id) {
  for (const auto& p : corpus) {
    if (p.id == id) return p;
  }
  throw Error("no problem " + id);
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("utd_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline CandidateCode code(std::string source) { return {std::move(source), Provenance::sampled_model, std::nullopt}; }

}  // namespace utdebug::support
