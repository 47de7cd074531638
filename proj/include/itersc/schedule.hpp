// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>
#include <string>
#include <vector>

#include "itersc/common.hpp"

namespace itersc {

enum class EventKind : char { W = 'W', S = 'S', R = 'R' };

struct Event {
  EventKind kind;
  ProcessSet group;
  friend bool operator==(const Event&, const Event&) = default;
};

struct RoundSchedule {
  std::vector<Event> events;

  std::string str() const;
  nlohmann::json to_json() const;
  static RoundSchedule from_json(const nlohmann::json& j);
  friend bool operator==(const RoundSchedule&, const RoundSchedule&) = default;
};

enum class Family { Sigma, Partition };
Family parse_family(const std::string& s);
const char* family_name(Family f);

// Per-process event order of a model.
std::vector<EventKind> model_order(Model m);

// Empty string when valid, otherwise the reason.
std::string schedule_problem(const RoundSchedule& s, int n, Model m);
void validate_schedule(const RoundSchedule& s, int n, Model m);

// Groups A1..Aq run in sequence, then the complement Y. WRO runs the
// write/scan blocks in sequence and one concurrent invoke of everyone last.
using Sigma = std::vector<ProcessSet>;
RoundSchedule sigma_schedule(const Sigma& groups, int n, Model m);
// Drops empty groups and a last group equal to the complement.
Sigma canonical_sigma(const Sigma& groups, int n);
std::string sigma_str(const Sigma& groups);

std::vector<RoundSchedule> enumerate_round_schedules(int n, Model m, Family f, std::size_t budget = 2000000);
std::vector<Sigma> enumerate_sigmas(int n);

RoundSchedule random_schedule(int n, Model m, Family f, std::mt19937_64& rng);

}  // namespace itersc
