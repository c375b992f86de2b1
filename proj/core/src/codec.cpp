#include "cobalt/codec.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <stdexcept>

namespace cobalt {

Digest sha256(std::string_view bytes) {
  Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size()) {
    throw std::runtime_error("sha256 failed");
  }
  return out;
}

std::string to_hex(const std::uint8_t* data, std::size_t len) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(len * 2);
  for (std::size_t i = 0; i < len; ++i) {
    s.push_back(kDigits[data[i] >> 4]);
    s.push_back(kDigits[data[i] & 0xF]);
  }
  return s;
}

std::optional<std::string> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  std::string out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = nibble(hex[i]);
    const int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<char>(hi * 16 + lo));
  }
  return out;
}

std::string encode_fields(const std::vector<std::string>& fields) {
  std::size_t total = 0;
  for (const auto& f : fields) total += f.size() + 8;
  std::string out;
  out.reserve(total);
  for (const auto& f : fields) {
    out += std::to_string(f.size());
    out.push_back(':');
    out += f;
  }
  return out;
}

std::optional<std::vector<std::string>> decode_fields(std::string_view encoded) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (pos < encoded.size()) {
    const std::size_t colon = encoded.find(':', pos);
    if (colon == std::string_view::npos || colon == pos) return std::nullopt;
    std::size_t len = 0;
    const auto* first = encoded.data() + pos;
    const auto* last = encoded.data() + colon;
    auto [ptr, ec] = std::from_chars(first, last, len);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    if (colon + 1 + len > encoded.size()) return std::nullopt;
    fields.emplace_back(encoded.substr(colon + 1, len));
    pos = colon + 1 + len;
  }
  return fields;
}

std::string encode_u64(std::uint64_t v) { return std::to_string(v); }

std::optional<std::uint64_t> decode_u64(std::string_view s) {
  std::uint64_t v = 0;
  if (s.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::int64_t> decode_i64(std::string_view s) {
  std::int64_t v = 0;
  if (s.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace cobalt
