#include "cobalt/message.hpp"

#include "cobalt/codec.hpp"

namespace cobalt {

namespace {
constexpr std::array<std::string_view, 16> kLabels = {
    "INIT", "ECHO",  "READY",  "AUX",   "CONF",   "FINISH",  "ELECT", "CONT",
    "CHECK", "ACCEPT", "SHARE", "SIG", "CHANGE", "CONFIRM", "LOCK",  "NEWVIEW",
};
const NodeSet kEmpty;
}  // namespace

std::string_view label_name(Label l) { return kLabels[static_cast<std::size_t>(l)]; }

std::optional<Label> parse_label(std::string_view s) {
  for (std::size_t i = 0; i < kLabels.size(); ++i) {
    if (kLabels[i] == s) return static_cast<Label>(i);
  }
  return std::nullopt;
}

void Actions::merge(Actions&& other) {
  if (sends.empty()) {
    sends = std::move(other.sends);
  } else {
    for (auto& m : other.sends) sends.push_back(std::move(m));
  }
  for (auto& c : other.coins) coins.push_back(std::move(c));
}

bool Tally::add(const std::string& key, NodeId sender) { return by_key_[key].insert(sender); }

const NodeSet& Tally::senders(const std::string& key) const {
  auto it = by_key_.find(key);
  return it == by_key_.end() ? kEmpty : it->second;
}

ExclusiveTally::Result ExclusiveTally::add(const std::string& key, NodeId sender) {
  auto [it, inserted] = by_sender_.emplace(sender, key);
  if (!inserted) return it->second == key ? Result::Duplicate : Result::Equivocation;
  by_key_[key].insert(sender);
  return Result::Added;
}

const NodeSet& ExclusiveTally::senders(const std::string& key) const {
  auto it = by_key_.find(key);
  return it == by_key_.end() ? kEmpty : it->second;
}

const std::string* ExclusiveTally::of(NodeId sender) const {
  auto it = by_sender_.find(sender);
  return it == by_sender_.end() ? nullptr : &it->second;
}

std::string child_path(std::string_view parent, std::string_view kind, std::int64_t index) {
  std::string out(parent);
  out.push_back('/');
  out += kind;
  out.push_back('/');
  out += std::to_string(index);
  return out;
}

std::optional<std::int64_t> child_index(std::string_view path, std::string_view parent,
                                        std::string_view kind) {
  if (path.size() <= parent.size() + kind.size() + 2) return std::nullopt;
  if (path.substr(0, parent.size()) != parent || path[parent.size()] != '/') return std::nullopt;
  std::string_view rest = path.substr(parent.size() + 1);
  if (rest.substr(0, kind.size()) != kind || rest.size() <= kind.size() || rest[kind.size()] != '/') {
    return std::nullopt;
  }
  rest.remove_prefix(kind.size() + 1);
  const std::size_t slash = rest.find('/');
  return decode_i64(rest.substr(0, slash));
}

}  // namespace cobalt
