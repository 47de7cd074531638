// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace itersc {

enum class ErrorCode {
  InvalidConfiguration,
  UnresolvedInstance,
  InvalidAdversary,
  RoundMismatch,
  NoInvocations,
  MissingBox,
  DomainError,
  InvalidSchedule,
  InvalidArgument,
  BudgetExceeded,
  ModelMismatch,
  PreconditionViolation,
  FullBoxConflict,
  InvalidInput,
  ConstructionFailed,
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

enum class Model { WOR, WRO, OWR };
const char* model_name(Model m);
Model parse_model(const std::string& s);

// Subset of process ids 1..31 as a bitmask (bit i set <=> id i present).
class ProcessSet {
 public:
  constexpr ProcessSet() = default;
  constexpr explicit ProcessSet(std::uint32_t bits) : bits_(bits) {}
  ProcessSet(std::initializer_list<int> ids) {
    for (int i : ids) insert(i);
  }
  static ProcessSet full(int n) { return ProcessSet(((1u << n) - 1u) << 1); }
  static ProcessSet single(int i) { return ProcessSet(1u << i); }
  static ProcessSet from_vector(const std::vector<int>& ids) {
    ProcessSet s;
    for (int i : ids) s.insert(i);
    return s;
  }

  std::uint32_t bits() const { return bits_; }
  bool contains(int i) const { return (bits_ >> i) & 1u; }
  void insert(int i) { bits_ |= 1u << i; }
  void erase(int i) { bits_ &= ~(1u << i); }
  int size() const { return std::popcount(bits_); }
  bool empty() const { return bits_ == 0; }
  int min() const { return std::countr_zero(bits_); }
  int max() const { return 31 - std::countl_zero(bits_); }
  bool subset_of(ProcessSet o) const { return (bits_ & ~o.bits_) == 0; }
  bool intersects(ProcessSet o) const { return (bits_ & o.bits_) != 0; }
  std::vector<int> members() const {
    std::vector<int> out;
    for (std::uint32_t b = bits_; b; b &= b - 1) out.push_back(std::countr_zero(b));
    return out;
  }

  friend ProcessSet operator|(ProcessSet a, ProcessSet b) { return ProcessSet(a.bits_ | b.bits_); }
  friend ProcessSet operator&(ProcessSet a, ProcessSet b) { return ProcessSet(a.bits_ & b.bits_); }
  friend ProcessSet operator-(ProcessSet a, ProcessSet b) { return ProcessSet(a.bits_ & ~b.bits_); }
  friend bool operator==(ProcessSet a, ProcessSet b) = default;
  // canonical order: by size, then lexicographic on sorted members
  friend bool operator<(ProcessSet a, ProcessSet b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.members() < b.members();
  }

  std::string str() const;
  nlohmann::json to_json() const { return members(); }
  static ProcessSet from_json(const nlohmann::json& j) { return from_vector(j.get<std::vector<int>>()); }

 private:
  std::uint32_t bits_ = 0;
};

// Parse "1,2;2,3" style set lists and "1,3" style single sets.
ProcessSet parse_process_set(const std::string& s);
std::vector<ProcessSet> parse_set_list(const std::string& s);

std::uint64_t binomial(int n, int k);

}  // namespace itersc

template <>
struct std::hash<itersc::ProcessSet> {
  std::size_t operator()(itersc::ProcessSet s) const noexcept { return s.bits(); }
};
