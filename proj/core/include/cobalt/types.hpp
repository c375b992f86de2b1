#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace cobalt {

struct NodeId {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

using Tick = std::int64_t;

// Raised for malformed or inconsistent configuration input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a caller breaks a state-machine precondition.
class ProtocolViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Dense set of node ids backed by 64-bit words.
class NodeSet {
 public:
  NodeSet() = default;
  NodeSet(std::initializer_list<NodeId> ids);

  bool insert(NodeId id);
  bool erase(NodeId id);
  bool contains(NodeId id) const;
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  void clear();

  std::vector<NodeId> to_vector() const;

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits != 0) {
        const int b = __builtin_ctzll(bits);
        f(NodeId{static_cast<std::uint32_t>(w * 64 + b)});
        bits &= bits - 1;
      }
    }
  }

  // Number of members also present in `other`.
  std::size_t intersection_size(const NodeSet& other) const;
  void unite(const NodeSet& other);

  friend bool operator==(const NodeSet& a, const NodeSet& b);

 private:
  std::vector<std::uint64_t> words_;
  std::size_t count_ = 0;
};

}  // namespace cobalt

template <>
struct std::hash<cobalt::NodeId> {
  std::size_t operator()(cobalt::NodeId id) const noexcept { return id.value; }
};
