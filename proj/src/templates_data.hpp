// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#pragma once

#include <string_view>

namespace utdebug::prompts::detail {

/// Body of templates/<name>.txt without its license header and final newline.
std::string_view template_body(std::string_view name);

}  // namespace utdebug::prompts::detail
