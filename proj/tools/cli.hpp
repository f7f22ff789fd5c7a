// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scilib::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

inline constexpr const char* kVersion = "0.1.0";

// Runs `scilib-sim` with the given arguments (without the program name).
// Nothing is written to `out` unless the command succeeds.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scilib::cli
