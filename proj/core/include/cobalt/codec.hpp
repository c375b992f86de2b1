#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cobalt {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::string_view bytes);
std::string to_hex(const std::uint8_t* data, std::size_t len);

template <std::size_t N>
std::string to_hex(const std::array<std::uint8_t, N>& a) {
  return to_hex(a.data(), N);
}

std::optional<std::string> from_hex(std::string_view hex);

// Length-prefixed field list: "<len>:<bytes>" repeated. Round-trips any bytes.
std::string encode_fields(const std::vector<std::string>& fields);
std::optional<std::vector<std::string>> decode_fields(std::string_view encoded);

std::string encode_u64(std::uint64_t v);
std::optional<std::uint64_t> decode_u64(std::string_view s);
std::optional<std::int64_t> decode_i64(std::string_view s);

}  // namespace cobalt
