// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "utdebug/core.hpp"

namespace utdebug {

using Json = nlohmann::ordered_json;

Json to_json(const UnitTest& ut);
Json to_json(const CandidateCode& code);
Json to_json(const Problem& p);
Json to_json(const RoundRecord& r);
Json to_json(const DebugTrace& t);
/// Line format consumed by finetuning tooling.
Json to_json(const SftRecord& r);

UnitTest unit_test_from_json(const Json& j, Origin origin = Origin::gold);
CandidateCode candidate_from_json(const Json& j);
Problem problem_from_json(const Json& j);
DebugTrace trace_from_json(const Json& j);

/// Line-delimited corpus. Blank lines are skipped; malformed lines raise
/// ConfigError naming the line number.
std::vector<Problem> read_corpus(const std::filesystem::path& path);
std::string corpus_text(const std::vector<Problem>& problems);

std::string read_file(const std::filesystem::path& path);
/// Writes via a sibling temp file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace utdebug
