// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "itersc/cli.hpp"

int main(int argc, char** argv) { return itersc::run_cli(argc, argv, std::cout, std::cerr); }
