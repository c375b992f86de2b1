#include "cobalt/harness/record.hpp"

#include "cobalt/codec.hpp"
#include "json.hpp"

namespace cobalt::harness {

void RunRecord::add(std::string_view kind, const std::vector<Field>& fields) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(kind);
  for (const auto& f : fields) {
    std::visit([&](const auto& v) { j[f.key] = v; }, f.value);
  }
  // Protocol payloads may carry arbitrary bytes; replace rather than throw.
  lines_.push_back(j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
}

std::string RunRecord::str() const {
  std::string out;
  for (const auto& l : lines_) {
    out += l;
    out += '\n';
  }
  return out;
}

std::string RunRecord::digest() const { return to_hex(sha256(str())); }

}  // namespace cobalt::harness
