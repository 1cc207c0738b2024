#include "swlm/vocabulary.h"

#include <algorithm>
#include <fstream>
#include <set>

#include "swlm/error.h"
#include "swlm/util.h"

namespace swlm {

Vocabulary::Vocabulary() {
  for (std::string_view t : {kBosToken, kEosToken, kUnkToken}) {
    index_.emplace(std::string(t), static_cast<TokenId>(tokens_.size()));
    tokens_.emplace_back(t);
  }
}

Vocabulary Vocabulary::FromTokens(std::span<const std::string> tokens) {
  Vocabulary v;
  for (const auto &t : tokens) {
    if (t == kBosToken || t == kEosToken || t == kUnkToken) continue;
    if (v.Find(t)) throw DataError("duplicate vocabulary token '" + t + "'");
    v.Add(t);
  }
  return v;
}

Vocabulary Vocabulary::FromCorpus(
    const std::vector<std::vector<std::string>> &sentences) {
  std::set<std::string> distinct;
  for (const auto &s : sentences)
    for (const auto &t : s) distinct.insert(t);
  std::vector<std::string> sorted(distinct.begin(), distinct.end());
  return FromTokens(sorted);
}

TokenId Vocabulary::Add(std::string_view token) {
  if (token.empty()) throw DataError("empty vocabulary token");
  auto it = index_.find(std::string(token));
  if (it != index_.end()) return it->second;
  TokenId id = static_cast<TokenId>(tokens_.size());
  index_.emplace(std::string(token), id);
  tokens_.emplace_back(token);
  return id;
}

std::optional<TokenId> Vocabulary::Find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::IdOrUnk(std::string_view token) const {
  return Find(token).value_or(kUnk);
}

const std::string &Vocabulary::Token(TokenId id) const {
  if (id >= tokens_.size())
    throw DataError("token id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

uint64_t Vocabulary::Hash() const {
  Fnv1a h;
  for (const auto &t : tokens_) {
    h.Update(t);
    h.Update("\n", 1);
  }
  return h.Digest();
}

void Vocabulary::Write(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (const auto &t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::Read(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> tokens;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno <= 3) {
      static constexpr std::string_view kReserved[] = {kBosToken, kEosToken,
                                                      kUnkToken};
      if (line != kReserved[lineno - 1])
        throw DataError(path + ":" + std::to_string(lineno) +
                        ": expected reserved token " +
                        std::string(kReserved[lineno - 1]));
      continue;
    }
    tokens.push_back(line);
  }
  return FromTokens(tokens);
}

std::string GramToString(const Vocabulary &vocab, std::span<const TokenId> gram) {
  std::string out;
  for (size_t i = 0; i < gram.size(); ++i) {
    if (i) out += ' ';
    out += vocab.Token(gram[i]);
  }
  return out;
}

}  // namespace swlm
