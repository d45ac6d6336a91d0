// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#pragma once

#include <string_view>

// Minimal leveled logging to stderr. The threshold comes from UTD_LOG
// (debug, info, warn, error, off) unless set explicitly.
namespace utdebug::log {

enum class Level { debug, info, warn, error, off };

void set_level(Level level);
Level level();

void write(Level level, std::string_view msg);

inline void debug(std::string_view msg) { write(Level::debug, msg); }
inline void info(std::string_view msg) { write(Level::info, msg); }
inline void warn(std::string_view msg) { write(Level::warn, msg); }
inline void error(std::string_view msg) { write(Level::error, msg); }

}  // namespace utdebug::log
