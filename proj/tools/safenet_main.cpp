// SPDX-FileCopyrightText: (c) 2026 SafeNet Transfer Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "safenet/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return safenet::cli::run(argc, argv, std::cout, std::cerr); }
