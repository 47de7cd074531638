// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace itersc {

// Immutable recursive value: bottom, integer or tuple. Structure is shared,
// so full-information views nest without copying.
class Value {
 public:
  enum class Kind : std::uint8_t { Bottom = 0, Int = 1, Tuple = 2 };

  Value() = default;  // bottom
  static Value integer(std::int64_t v);
  static Value tuple(std::vector<Value> items);
  static Value pair(Value a, Value b) { return tuple({std::move(a), std::move(b)}); }

  Kind kind() const;
  bool is_bottom() const { return node_ == nullptr; }
  bool is_int() const { return kind() == Kind::Int; }
  bool is_tuple() const { return kind() == Kind::Tuple; }

  std::int64_t as_int() const;
  const std::vector<Value>& items() const;
  std::size_t size() const { return is_tuple() ? items().size() : 0; }
  const Value& operator[](std::size_t i) const { return items().at(i); }

  std::uint64_t hash() const;
  const void* identity() const { return node_.get(); }

  friend bool operator==(const Value& a, const Value& b);
  friend std::strong_ordering operator<=>(const Value& a, const Value& b);

  nlohmann::json to_json() const;
  static Value from_json(const nlohmann::json& j);
  std::string str() const;

 private:
  struct Node;
  std::shared_ptr<const Node> node_;
};

std::uint64_t mix64(std::uint64_t x);
inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
  return mix64(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}
// FNV-1a, stable across builds; used for trace digests.
std::uint64_t fnv1a(const std::string& s);
std::string hex64(std::uint64_t v);

}  // namespace itersc

template <>
struct std::hash<itersc::Value> {
  std::size_t operator()(const itersc::Value& v) const noexcept { return v.hash(); }
};
