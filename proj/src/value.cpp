// SPDX-License-Identifier: Apache-2.0
#include "itersc/value.hpp"

#include <cstdio>
#include <stdexcept>

namespace itersc {

struct Value::Node {
  Kind kind;
  std::int64_t scalar = 0;
  std::vector<Value> items;
  std::uint64_t h = 0;
};

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Value Value::integer(std::int64_t v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Int;
  n->scalar = v;
  n->h = hash_combine(0x1111, static_cast<std::uint64_t>(v));
  Value out;
  out.node_ = std::move(n);
  return out;
}

Value Value::tuple(std::vector<Value> items) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Tuple;
  std::uint64_t h = hash_combine(0x2222, items.size());
  for (const auto& it : items) h = hash_combine(h, it.hash());
  n->h = h;
  n->items = std::move(items);
  Value out;
  out.node_ = std::move(n);
  return out;
}

Value::Kind Value::kind() const { return node_ ? node_->kind : Kind::Bottom; }

std::int64_t Value::as_int() const {
  if (!is_int()) throw std::logic_error("value is not an integer: " + str());
  return node_->scalar;
}

const std::vector<Value>& Value::items() const {
  static const std::vector<Value> empty;
  if (!is_tuple()) return empty;
  return node_->items;
}

std::uint64_t Value::hash() const { return node_ ? node_->h : 0x5bd1e995ULL; }

bool operator==(const Value& a, const Value& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  if (a.node_->h != b.node_->h || a.node_->kind != b.node_->kind) return false;
  if (a.node_->kind == Value::Kind::Int) return a.node_->scalar == b.node_->scalar;
  return a.node_->items == b.node_->items;
}

std::strong_ordering operator<=>(const Value& a, const Value& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  auto ka = a.kind(), kb = b.kind();
  if (ka != kb) return static_cast<int>(ka) <=> static_cast<int>(kb);
  if (ka == Value::Kind::Int) return a.node_->scalar <=> b.node_->scalar;
  const auto& x = a.node_->items;
  const auto& y = b.node_->items;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    auto c = x[i] <=> y[i];
    if (c != 0) return c;
  }
  return x.size() <=> y.size();
}

nlohmann::json Value::to_json() const {
  switch (kind()) {
    case Kind::Bottom:
      return nullptr;
    case Kind::Int:
      return node_->scalar;
    case Kind::Tuple: {
      auto arr = nlohmann::json::array();
      for (const auto& it : node_->items) arr.push_back(it.to_json());
      return arr;
    }
  }
  return nullptr;
}

Value Value::from_json(const nlohmann::json& j) {
  if (j.is_null()) return {};
  if (j.is_number_integer()) return integer(j.get<std::int64_t>());
  if (j.is_array()) {
    std::vector<Value> items;
    for (const auto& e : j) items.push_back(from_json(e));
    return tuple(std::move(items));
  }
  throw std::invalid_argument("cannot decode value from " + j.dump());
}

std::string Value::str() const {
  switch (kind()) {
    case Kind::Bottom:
      return "_";
    case Kind::Int:
      return std::to_string(node_->scalar);
    case Kind::Tuple: {
      std::string s = "<";
      for (std::size_t i = 0; i < node_->items.size(); ++i) {
        if (i) s += ",";
        s += node_->items[i].str();
      }
      return s + ">";
    }
  }
  return "?";
}

}  // namespace itersc
