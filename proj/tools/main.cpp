// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return aldnorm::cli::run(argc, argv, std::cin, std::cout, std::cerr); }
