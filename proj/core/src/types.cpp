#include "cobalt/types.hpp"

#include <bit>

namespace cobalt {

NodeSet::NodeSet(std::initializer_list<NodeId> ids) {
  for (NodeId id : ids) insert(id);
}

bool NodeSet::insert(NodeId id) {
  const std::size_t w = id.value / 64;
  if (w >= words_.size()) words_.resize(w + 1, 0);
  const std::uint64_t mask = std::uint64_t{1} << (id.value % 64);
  if (words_[w] & mask) return false;
  words_[w] |= mask;
  ++count_;
  return true;
}

bool NodeSet::erase(NodeId id) {
  const std::size_t w = id.value / 64;
  if (w >= words_.size()) return false;
  const std::uint64_t mask = std::uint64_t{1} << (id.value % 64);
  if (!(words_[w] & mask)) return false;
  words_[w] &= ~mask;
  --count_;
  return true;
}

bool NodeSet::contains(NodeId id) const {
  const std::size_t w = id.value / 64;
  return w < words_.size() && (words_[w] >> (id.value % 64)) & 1U;
}

void NodeSet::clear() {
  words_.clear();
  count_ = 0;
}

std::vector<NodeId> NodeSet::to_vector() const {
  std::vector<NodeId> out;
  out.reserve(count_);
  for_each([&](NodeId id) { out.push_back(id); });
  return out;
}

std::size_t NodeSet::intersection_size(const NodeSet& other) const {
  std::size_t n = 0;
  const std::size_t m = std::min(words_.size(), other.words_.size());
  for (std::size_t w = 0; w < m; ++w) n += std::popcount(words_[w] & other.words_[w]);
  return n;
}

void NodeSet::unite(const NodeSet& other) {
  if (other.words_.size() > words_.size()) words_.resize(other.words_.size(), 0);
  count_ = 0;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    if (w < other.words_.size()) words_[w] |= other.words_[w];
    count_ += std::popcount(words_[w]);
  }
}

bool operator==(const NodeSet& a, const NodeSet& b) {
  if (a.count_ != b.count_) return false;
  const std::size_t m = std::max(a.words_.size(), b.words_.size());
  for (std::size_t w = 0; w < m; ++w) {
    const std::uint64_t x = w < a.words_.size() ? a.words_[w] : 0;
    const std::uint64_t y = w < b.words_.size() ? b.words_[w] : 0;
    if (x != y) return false;
  }
  return true;
}

}  // namespace cobalt
