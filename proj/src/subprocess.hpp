// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#pragma once

#include <chrono>
#include <string>
#include <vector>

namespace utdebug::detail {

struct ProcessResult {
  bool spawned = false;
  bool killed_on_deadline = false;
  int exit_code = -1;    // valid when exited normally
  int term_signal = 0;   // nonzero when terminated by a signal
  std::string out;
  std::string err;
  std::chrono::milliseconds elapsed{0};
};

/// Runs argv in its own process group, feeds `input` on stdin and
/// collects stdout/stderr. The whole group is SIGKILLed at the deadline.
ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input,
                          std::chrono::milliseconds deadline);

}  // namespace utdebug::detail
