#include "cobalt/crs.hpp"

#include <algorithm>

namespace cobalt {

std::string encode_share(const ShareToken& s) {
  return encode_fields({s.tag, s.key, std::to_string(s.subset), std::to_string(s.holder.value), s.token});
}

std::optional<ShareToken> decode_share(std::string_view content) {
  auto f = decode_fields(content);
  if (!f || f->size() != 5) return std::nullopt;
  auto subset = decode_u64((*f)[2]);
  auto holder = decode_u64((*f)[3]);
  if (!subset || !holder || *subset > UINT32_MAX || *holder > UINT32_MAX) return std::nullopt;
  return ShareToken{(*f)[1], static_cast<std::uint32_t>(*subset), (*f)[0],
                    NodeId{static_cast<std::uint32_t>(*holder)}, (*f)[4]};
}

void CrsOracle::declare_key(RandomizingKey key) {
  if (!key.holders || key.holders->empty()) {
    throw ConfigError("randomizing key " + key.id + " has no holder subsets");
  }
  if (keys_.count(key.id) != 0) throw ConfigError("duplicate randomizing key " + key.id);
  std::string id = key.id;
  keys_.emplace(std::move(id), std::move(key));
}

const RandomizingKey* CrsOracle::key(std::string_view id) const {
  auto it = keys_.find(id);
  return it == keys_.end() ? nullptr : &it->second;
}

std::vector<std::string> CrsOracle::key_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, k] : keys_) out.push_back(id);
  return out;
}

Digest CrsOracle::secret(std::string_view key) const {
  return sha256(encode_fields({"secret", std::to_string(master_seed_), std::string(key)}));
}

std::string CrsOracle::token_for(std::string_view key, std::uint32_t subset, std::string_view tag,
                                 NodeId holder) const {
  const Digest s = secret(key);
  return to_hex(sha256(encode_fields({to_hex(s), "share", std::to_string(subset), std::string(tag),
                                      std::to_string(holder.value)})));
}

std::string CrsOracle::signature(std::string_view key, std::string_view tag) const {
  const Digest s = secret(key);
  return to_hex(sha256(encode_fields({to_hex(s), "sig", std::string(tag)})));
}

std::vector<ShareToken> CrsOracle::shares_for(NodeId holder, const std::set<std::string>& keys,
                                              std::string_view tag) const {
  std::vector<ShareToken> out;
  for (const auto& id : keys) {
    const RandomizingKey* k = key(id);
    if (k == nullptr) continue;
    for (std::uint32_t s = 0; s < k->holders->size(); ++s) {
      if ((*k->holders)[s].contains(holder)) {
        out.push_back(ShareToken{id, s, std::string(tag), holder, token_for(id, s, tag, holder)});
      }
    }
  }
  return out;
}

bool CrsOracle::verify(const ShareToken& t) const {
  const RandomizingKey* k = key(t.key);
  if (k == nullptr || t.subset >= k->holders->size()) return false;
  if (!(*k->holders)[t.subset].contains(t.holder)) return false;
  return t.token == token_for(t.key, t.subset, t.tag, t.holder);
}

std::optional<std::string> CrsOracle::reconstruct(std::string_view key_id, std::string_view tag,
                                                  std::span<const ShareToken> tokens) const {
  const RandomizingKey* k = key(key_id);
  if (k == nullptr) return std::nullopt;
  std::vector<NodeSet> holders(k->holders->size());
  for (const auto& t : tokens) {
    if (t.key != key_id || t.tag != tag || !verify(t)) continue;
    holders[t.subset].insert(t.holder);
  }
  for (std::size_t s = 0; s < holders.size(); ++s) {
    if (holders[s].size() >= std::size_t{(*k->holders)[s].t} + 1) return signature(key_id, tag);
  }
  return std::nullopt;
}

bool CrsOracle::verify_signature(std::string_view key_id, std::string_view tag,
                                 std::string_view sig) const {
  return key(key_id) != nullptr && sig == signature(key_id, tag);
}

CoinValue crs_output(const std::map<std::string, std::string>& signatures, CoinSpace space) {
  std::vector<std::string> parts;
  for (const auto& [id, sig] : signatures) {
    parts.push_back(id);
    parts.push_back(sig);
  }
  const Digest mixed = sha256(encode_fields(parts));
  const Digest g = sha256(encode_fields({"G", to_hex(mixed), space == CoinSpace::Binary ? "bit" : "seed128"}));
  CoinValue out{};
  if (space == CoinSpace::Binary) {
    out[0] = g[0] & 1U;
  } else {
    std::copy_n(g.begin(), out.size(), out.begin());
  }
  return out;
}

void CoinService::register_key(const std::string& key_id) {
  if (oracle_->key(key_id) == nullptr) throw ConfigError("unknown randomizing key " + key_id);
  registered_.insert(key_id);
}

bool CoinService::sampled(const std::string& tag) const {
  auto it = tags_.find(tag);
  return it != tags_.end() && it->second.sampled;
}

std::optional<CoinValue> CoinService::output(const std::string& tag) const {
  auto it = tags_.find(tag);
  if (it == tags_.end()) return std::nullopt;
  return it->second.output;
}

Actions CoinService::sample(const CoinRequest& req, std::vector<Output>& outputs) {
  return sample(req, registered_, outputs);
}

Actions CoinService::sample(const CoinRequest& req, const std::set<std::string>& keys,
                            std::vector<Output>& outputs) {
  auto& st = tags_[req.tag];
  if (st.sampled) return {};
  if (keys.empty()) throw ConfigError("coin sampled with no registered randomizing keys");
  st.sampled = true;
  st.space = req.space;
  st.keys = keys;
  Actions a;
  for (auto& tok : oracle_->shares_for(self_, st.keys, req.tag)) {
    a.sends.push_back(Message{std::string(kInstance), Label::Share, 0, encode_share(tok), self_});
    auto& list = st.tokens[tok.key];
    const bool dup = std::any_of(list.begin(), list.end(), [&](const ShareToken& t) {
      return t.subset == tok.subset && t.holder == tok.holder;
    });
    if (!dup) list.push_back(std::move(tok));
  }
  a.merge(try_finish(req.tag, st, outputs));
  return a;
}

Actions CoinService::handle(const Message& msg, std::vector<Output>& outputs) {
  if (msg.instance != kInstance) return {};
  if (msg.label == Label::Share) {
    auto tok = decode_share(msg.content);
    if (!tok || tok->holder != msg.sender || !oracle_->verify(*tok)) {
      ++invalid_;
      return {};
    }
    auto& st = tags_[tok->tag];
    auto& list = st.tokens[tok->key];
    const bool dup = std::any_of(list.begin(), list.end(), [&](const ShareToken& t) {
      return t.subset == tok->subset && t.holder == tok->holder;
    });
    if (dup) return {};
    const std::string tag = tok->tag;
    list.push_back(std::move(*tok));
    return try_finish(tag, st, outputs);
  }
  if (msg.label == Label::Sig) {
    auto f = decode_fields(msg.content);
    if (!f || f->size() != 3 || !oracle_->verify_signature((*f)[1], (*f)[0], (*f)[2])) {
      ++invalid_;
      return {};
    }
    auto& st = tags_[(*f)[0]];
    if (st.sigs.count((*f)[1]) != 0) return {};
    st.sigs.emplace((*f)[1], (*f)[2]);
    Actions a;
    a.sends.push_back(Message{std::string(kInstance), Label::Sig, 0, msg.content, self_});
    a.merge(try_finish((*f)[0], st, outputs));
    return a;
  }
  return {};
}

Actions CoinService::try_finish(const std::string& tag, TagState& st, std::vector<Output>& outputs) {
  Actions a;
  for (const auto& [key, list] : st.tokens) {
    if (st.sigs.count(key) != 0) continue;
    if (auto sig = oracle_->reconstruct(key, tag, list)) {
      st.sigs.emplace(key, *sig);
      a.sends.push_back(
          Message{std::string(kInstance), Label::Sig, 0, encode_fields({tag, key, *sig}), self_});
    }
  }
  if (!st.sampled || st.output) return a;
  std::map<std::string, std::string> chosen;
  for (const auto& key : st.keys) {
    auto it = st.sigs.find(key);
    if (it == st.sigs.end()) return a;
    chosen.emplace(key, it->second);
  }
  st.output = crs_output(chosen, st.space);
  outputs.push_back(Output{tag, *st.output});
  return a;
}

CoinValue adversary_predict(const CrsOracle& oracle, const AdversaryView& view,
                            const std::set<std::string>& keys, std::string_view tag,
                            CoinSpace space, std::mt19937_64& guess_rng) {
  std::map<std::string, std::string> sigs;
  bool complete = !keys.empty();
  for (const auto& key : keys) {
    auto it = view.sigs.find(key);
    if (it != view.sigs.end() && oracle.verify_signature(key, tag, it->second)) {
      sigs.emplace(key, it->second);
      continue;
    }
    auto sig = oracle.reconstruct(key, tag, view.tokens);
    if (!sig) {
      complete = false;
      break;
    }
    sigs.emplace(key, *sig);
  }
  if (complete) return crs_output(sigs, space);
  CoinValue guess{};
  if (space == CoinSpace::Binary) {
    guess[0] = static_cast<std::uint8_t>(guess_rng() & 1U);
  } else {
    for (auto& b : guess) b = static_cast<std::uint8_t>(guess_rng());
  }
  return guess;
}

}  // namespace cobalt
