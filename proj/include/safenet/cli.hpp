// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace safenet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputEnv = "SAFENET_OUT";

/// Parses argv and dispatches one subcommand. Never throws; failures are
/// reported as a single line on `err` and mapped to an exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace safenet::cli
