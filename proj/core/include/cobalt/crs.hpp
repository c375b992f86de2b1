#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cobalt/codec.hpp"
#include "cobalt/message.hpp"
#include "cobalt/topology.hpp"

namespace cobalt {

// A randomizing key whose threshold shares are held by the owner's essential subsets.
struct RandomizingKey {
  std::string id;
  NodeId owner;
  SubsetList holders;
};

struct ShareToken {
  std::string key;
  std::uint32_t subset = 0;
  std::string tag;
  NodeId holder;
  std::string token;

  friend bool operator==(const ShareToken&, const ShareToken&) = default;
};

std::string encode_share(const ShareToken& s);
std::optional<ShareToken> decode_share(std::string_view content);

// Simulator-held secret store. Protocol code only sees tokens and signatures.
class CrsOracle {
 public:
  explicit CrsOracle(std::uint64_t master_seed) : master_seed_(master_seed) {}

  void declare_key(RandomizingKey key);
  const RandomizingKey* key(std::string_view id) const;
  std::vector<std::string> key_ids() const;

  // One token per (key, subset) pair among `keys` where `holder` is a member.
  std::vector<ShareToken> shares_for(NodeId holder, const std::set<std::string>& keys,
                                     std::string_view tag) const;
  bool verify(const ShareToken& token) const;

  // Signature once some holder subset contributes t_S+1 distinct valid tokens.
  std::optional<std::string> reconstruct(std::string_view key, std::string_view tag,
                                         std::span<const ShareToken> tokens) const;
  bool verify_signature(std::string_view key, std::string_view tag, std::string_view sig) const;

 private:
  Digest secret(std::string_view key) const;
  std::string token_for(std::string_view key, std::uint32_t subset, std::string_view tag,
                        NodeId holder) const;
  std::string signature(std::string_view key, std::string_view tag) const;

  std::uint64_t master_seed_;
  std::map<std::string, RandomizingKey, std::less<>> keys_;
};

// Mixes per-key signatures (ordered by key id) and expands into the sample space.
CoinValue crs_output(const std::map<std::string, std::string>& signatures, CoinSpace space);

// Per-node common-random-source endpoint. Messages use the "crs" instance.
class CoinService {
 public:
  struct Output {
    std::string tag;
    CoinValue value;
  };

  static constexpr std::string_view kInstance = "crs";

  CoinService(NodeId self, const CrsOracle* oracle) : self_(self), oracle_(oracle) {}

  void register_key(const std::string& key_id);
  const std::set<std::string>& registered() const { return registered_; }

  // Own shares count immediately; an output may already be available on return.
  Actions sample(const CoinRequest& req, std::vector<Output>& outputs);
  // Samples against an explicit key set instead of the registered one.
  Actions sample(const CoinRequest& req, const std::set<std::string>& keys, std::vector<Output>& outputs);
  Actions handle(const Message& msg, std::vector<Output>& outputs);

  bool sampled(const std::string& tag) const;
  std::optional<CoinValue> output(const std::string& tag) const;
  std::size_t invalid_tokens() const { return invalid_; }

 private:
  struct TagState {
    bool sampled = false;
    CoinSpace space = CoinSpace::Binary;
    std::set<std::string> keys;
    std::map<std::string, std::vector<ShareToken>> tokens;
    std::map<std::string, std::string> sigs;
    std::optional<CoinValue> output;
  };

  Actions try_finish(const std::string& tag, TagState& st, std::vector<Output>& outputs);

  NodeId self_;
  const CrsOracle* oracle_;
  std::set<std::string> registered_;
  std::map<std::string, TagState> tags_;
  std::size_t invalid_ = 0;
};

// What the adversary can see about one tag: shares of its own nodes, delivered
// SHARE messages, and delivered SIG echoes.
struct AdversaryView {
  std::vector<ShareToken> tokens;
  std::map<std::string, std::string> sigs;
};

// Exact output when every key is reconstructible from the view, otherwise a guess.
CoinValue adversary_predict(const CrsOracle& oracle, const AdversaryView& view,
                            const std::set<std::string>& keys, std::string_view tag,
                            CoinSpace space, std::mt19937_64& guess_rng);

}  // namespace cobalt
