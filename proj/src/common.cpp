// SPDX-License-Identifier: Apache-2.0
#include "itersc/common.hpp"

#include <sstream>

namespace itersc {

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidConfiguration: return "invalid-configuration";
    case ErrorCode::UnresolvedInstance: return "unresolved-instance";
    case ErrorCode::InvalidAdversary: return "invalid-adversary";
    case ErrorCode::RoundMismatch: return "round-mismatch";
    case ErrorCode::NoInvocations: return "no-invocations";
    case ErrorCode::MissingBox: return "missing-box";
    case ErrorCode::DomainError: return "domain-error";
    case ErrorCode::InvalidSchedule: return "invalid-schedule";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::BudgetExceeded: return "budget-exceeded";
    case ErrorCode::ModelMismatch: return "model-mismatch";
    case ErrorCode::PreconditionViolation: return "precondition-violation";
    case ErrorCode::FullBoxConflict: return "full-box-conflict";
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::ConstructionFailed: return "construction-failed";
  }
  return "error";
}

const char* model_name(Model m) {
  switch (m) {
    case Model::WOR: return "WOR";
    case Model::WRO: return "WRO";
    case Model::OWR: return "OWR";
  }
  return "?";
}

Model parse_model(const std::string& s) {
  if (s == "WOR" || s == "wor") return Model::WOR;
  if (s == "WRO" || s == "wro") return Model::WRO;
  if (s == "OWR" || s == "owr") return Model::OWR;
  throw Error(ErrorCode::InvalidConfiguration, "unknown model " + s);
}

std::string ProcessSet::str() const {
  std::string s = "{";
  bool first = true;
  for (int i : members()) {
    if (!first) s += ",";
    s += std::to_string(i);
    first = false;
  }
  return s + "}";
}

ProcessSet parse_process_set(const std::string& s) {
  ProcessSet out;
  std::string tok;
  std::stringstream ss(s);
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    int id = std::stoi(tok);
    if (id < 1 || id > 30) throw Error(ErrorCode::InvalidArgument, "process id out of range: " + tok);
    out.insert(id);
  }
  return out;
}

std::vector<ProcessSet> parse_set_list(const std::string& s) {
  std::vector<ProcessSet> out;
  std::string tok;
  std::stringstream ss(s);
  while (std::getline(ss, tok, ';')) {
    if (tok.empty()) continue;
    out.push_back(parse_process_set(tok));
  }
  return out;
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

}  // namespace itersc
