// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace safenet {

using Rng = std::mt19937_64;

// Derives an independent stream seed from a parent seed and a named purpose.
// All randomness in the library flows through this function, so a run is
// reproducible from a single global seed.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view component,
                          std::uint64_t a = 0, std::uint64_t b = 0);

inline Rng make_rng(std::uint64_t parent, std::string_view component,
                    std::uint64_t a = 0, std::uint64_t b = 0) {
    return Rng(derive_seed(parent, component, a, b));
}

// 64-bit FNV-1a, used for config and artifact fingerprints.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace safenet
