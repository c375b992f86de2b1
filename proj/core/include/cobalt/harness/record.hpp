#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cobalt::harness {

struct Field {
  using Value = std::variant<std::int64_t, std::string, bool>;

  Field(std::string k, std::int64_t v) : key(std::move(k)), value(v) {}
  Field(std::string k, int v) : key(std::move(k)), value(std::int64_t{v}) {}
  Field(std::string k, std::uint64_t v) : key(std::move(k)), value(static_cast<std::int64_t>(v)) {}
  Field(std::string k, std::uint32_t v) : key(std::move(k)), value(std::int64_t{v}) {}
  Field(std::string k, std::string v) : key(std::move(k)), value(std::move(v)) {}
  Field(std::string k, const char* v) : key(std::move(k)), value(std::string(v)) {}
  Field(std::string k, bool v) : key(std::move(k)), value(v) {}

  std::string key;
  Value value;
};

// Line-delimited JSON log of one run. Fields keep insertion order so the
// serialization is canonical for a given sequence of calls.
class RunRecord {
 public:
  void add(std::string_view kind, const std::vector<Field>& fields);

  const std::vector<std::string>& lines() const { return lines_; }
  std::string str() const;
  // Hex SHA-256 of str(), used as a compact replay fingerprint.
  std::string digest() const;

 private:
  std::vector<std::string> lines_;
};

}  // namespace cobalt::harness
