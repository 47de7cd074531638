// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "itersc/executor.hpp"

namespace itersc::testing {

struct ShiftReport {
  std::uint64_t executions = 0;
  std::uint64_t decisions_compared = 0;
  std::uint64_t decided_compared = 0;  // comparisons where the source had decided
  std::uint64_t mismatches = 0;
  std::string first_mismatch;
};

// Runs the source automaton on random inputs, schedules and adversary values,
// replays the matching execution of its transform and compares decisions:
// every decision of the source in round l must appear in round l+1 of the
// transformed protocol, and nothing earlier.
ShiftReport check_transform_shift(const ProtocolAutomaton& src, int n, int runs, std::uint64_t seed);

}  // namespace itersc::testing
