// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>

namespace itersc {

inline constexpr const char* kVersion = "0.1.0";

// Exit status: 0 all checks passed, 1 a property was violated, 2 usage or configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace itersc
