#ifndef SWLM_VOCABULARY_H_
#define SWLM_VOCABULARY_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace swlm {

using TokenId = uint32_t;

// An n-gram or history as a token-id sequence, oldest token first.
using Gram = std::vector<TokenId>;

struct GramHash {
  size_t operator()(const Gram &g) const noexcept {
    uint64_t h = 0xcbf29ce484222325ULL ^ g.size();
    for (TokenId t : g) {
      h ^= t + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h *= 0x100000001b3ULL;
    }
    return static_cast<size_t>(h);
  }
};

// Subword inventory. Ids 0..2 are reserved for <s>, </s> and <unk>; regular
// tokens follow. <s> only ever appears as history, so the predictable
// vocabulary (what distributions range over) is every id except <s>.
class Vocabulary {
 public:
  static constexpr TokenId kBos = 0;
  static constexpr TokenId kEos = 1;
  static constexpr TokenId kUnk = 2;
  static constexpr std::string_view kBosToken = "<s>";
  static constexpr std::string_view kEosToken = "</s>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();

  // Reserved tokens first, then `tokens` in the given order. Reserved
  // strings inside `tokens` are skipped; duplicates and empty strings throw.
  static Vocabulary FromTokens(std::span<const std::string> tokens);

  // Reserved tokens, then the distinct tokens of the corpus in byte order.
  static Vocabulary FromCorpus(
      const std::vector<std::vector<std::string>> &sentences);

  TokenId Add(std::string_view token);

  std::optional<TokenId> Find(std::string_view token) const;
  // Maps unknown strings to <unk>.
  TokenId IdOrUnk(std::string_view token) const;
  const std::string &Token(TokenId id) const;

  size_t size() const { return tokens_.size(); }
  // Number of predictable tokens (everything except <s>).
  size_t NumPredictable() const { return tokens_.size() - 1; }
  bool Contains(TokenId id) const { return id < tokens_.size(); }

  // Output index <-> token id for distributions over the predictable set.
  static size_t OutputIndex(TokenId id) { return id - 1; }
  static TokenId OutputToken(size_t index) {
    return static_cast<TokenId>(index + 1);
  }

  const std::vector<std::string> &tokens() const { return tokens_; }
  uint64_t Hash() const;

  bool operator==(const Vocabulary &other) const {
    return tokens_ == other.tokens_;
  }

  // One token per line, in id order.
  void Write(const std::string &path) const;
  static Vocabulary Read(const std::string &path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Renders a gram as space separated token strings.
std::string GramToString(const Vocabulary &vocab, std::span<const TokenId> gram);

}  // namespace swlm

#endif  // SWLM_VOCABULARY_H_
