// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#include "utdebug/log.hpp"

#include <array>
#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace utdebug::log {

namespace {

constexpr std::array kNames = {"debug", "info", "warn", "error", "off"};

Level from_env() {
  const char* v = std::getenv("UTD_LOG");
  if (!v) return Level::warn;
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (std::string_view(v) == kNames[i]) return static_cast<Level>(i);
  }
  return Level::warn;
}

std::atomic<Level>& threshold() {
  static std::atomic<Level> t{from_env()};
  return t;
}

std::mutex& sink_mutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

void set_level(Level level) { threshold().store(level); }
Level level() { return threshold().load(); }

void write(Level lvl, std::string_view msg) {
  if (lvl < threshold().load() || lvl == Level::off) return;
  std::lock_guard lock(sink_mutex());
  std::cerr << "[utdebug " << kNames[static_cast<std::size_t>(lvl)] << "] " << msg << '\n';
}

}  // namespace utdebug::log
