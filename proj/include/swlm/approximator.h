#ifndef SWLM_APPROXIMATOR_H_
#define SWLM_APPROXIMATOR_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "swlm/ngram_counts.h"
#include "swlm/rnn.h"
#include "swlm/scorer_stream.h"

namespace swlm {

enum class ScoreMethod : uint8_t { kPc = 0, kOurs = 1, kOracle = 2 };

// How the probability-conversion normalizer sum_v y(v|h) treats
// continuations v never observed after h.
//   kFullVector: their mass comes from the model's whole output vectors,
//                averaged over the occurrences of h (costs |V| per position).
//   kStrict:     they contribute nothing; only observed continuations count.
enum class PcNormalizer : uint8_t { kFullVector = 0, kStrict = 1 };

std::string MethodName(ScoreMethod m);

// Raw per-(history, word) scores awaiting conversion into a back-off model.
// Sums are stored unnormalized together with c(h) (the number of positions
// whose prefix ends in h) so tables merge exactly.
struct ScoreTable {
  ScoreMethod method = ScoreMethod::kOurs;
  int order = 1;  // histories are at most order-1 tokens long
  uint32_t k = 0;
  PcNormalizer normalizer = PcNormalizer::kFullVector;
  ProbAccumulator acc;
  // PC, full-vector mode: per history, sum over its occurrences of the
  // output mass on continuations unobserved after it.
  std::unordered_map<Gram, double, GramHash> unobserved_mass;

  uint64_t vocab_hash() const { return acc.vocab_hash(); }
  uint64_t Positions(std::span<const TokenId> h) const { return acc.Positions(h); }

  // PC: y(w|h) = sum/hits, the occurrence-weighted mean over corpus
  // occurrences of hw. Ours: sum/c(h). Sorted by token id; nullopt when h is
  // not in the table.
  std::optional<std::vector<std::pair<TokenId, double>>> Scores(
      std::span<const TokenId> h) const;

  // Divides Scores(h) by the history normalizer: sum_v y(v|h) for PC, 1 for
  // Ours (already divided by c(h)). Returns nullopt when the total mass is 0.
  std::optional<std::vector<std::pair<TokenId, double>>> NormalizedScores(
      std::span<const TokenId> h) const;

  void Merge(const ScoreTable &other);

  void Write(std::ostream &os) const;
  static ScoreTable Read(std::istream &is);
  void Save(const std::string &path) const;
  static ScoreTable Load(const std::string &path);
};

// Probability conversion. `counts` must cover `n` and the stream's corpus;
// the full-vector normalizer additionally needs a stream with full vectors.
ScoreTable PcScores(RecordSource &stream, const CountTrie &counts, int n,
                    PcNormalizer normalizer = PcNormalizer::kFullVector);

using ContextSet = std::unordered_set<Gram, GramHash>;

// Top-K sum: every position adds p_obs to (h,u) and each top-K (w,p) to
// (h,w) for every history suffix h of its prefix with |h| <= n-1. With a
// candidate set, only those histories (and the empty one) accumulate.
ScoreTable OursScores(RecordSource &stream, int n,
                      const ContextSet *candidate_contexts = nullptr);

// Exact marginal over sentence histories by explicit enumeration:
// p(w|h) = sum_{b} c(bh)/c(h) p_r(w|bh) over distinct prefixes bh.
// Indexed by Vocabulary::OutputIndex. Throws DataError when h never occurs.
std::vector<double> OracleMarginalize(const Corpus &corpus,
                                      const SequenceScorer &scorer,
                                      std::span<const TokenId> h);
std::vector<double> OracleMarginalize(const Corpus &corpus,
                                      const RnnParams &params,
                                      std::span<const TokenId> h);

}  // namespace swlm

#endif  // SWLM_APPROXIMATOR_H_
