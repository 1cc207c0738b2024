#ifndef SWLM_NGRAM_COUNTS_H_
#define SWLM_NGRAM_COUNTS_H_

#include <iosfwd>
#include <span>
#include <string>

#include "swlm/context_table.h"
#include "swlm/corpus_io.h"

namespace swlm {

// Exact n-gram counts. <s> only ever appears as history; every sentence
// contributes one predicted </s>. Each history also records how many
// predicted positions it preceded, so c(h) for a history is
// HistoryCount(h) = sum_w c(hw).
class CountTrie {
 public:
  CountTrie() = default;
  CountTrie(uint64_t vocab_hash, int max_order) : table_(vocab_hash, max_order) {}

  int max_order() const { return table_.max_order(); }
  uint64_t vocab_hash() const { return table_.vocab_hash(); }

  // Adds one padded sentence.
  void AddSentence(std::span<const TokenId> sentence);

  // c(x) for a gram x predicting its last token; 0 when absent.
  uint64_t Count(std::span<const TokenId> gram) const;
  uint64_t HistoryCount(std::span<const TokenId> history) const;
  // Token count including </s>.
  uint64_t TotalPredictions() const;

  const ContextTable<uint64_t> &table() const { return table_; }
  bool empty() const { return table_.empty(); }

  void Merge(const CountTrie &other) { table_.Merge(other.table_); }

  void Write(std::ostream &os) const;
  static CountTrie Read(std::istream &is);
  void Save(const std::string &path) const;
  static CountTrie Load(const std::string &path);

  bool operator==(const CountTrie &o) const { return table_ == o.table_; }

 private:
  ContextTable<uint64_t> table_;
};

CountTrie CountNgrams(const Corpus &corpus, int max_order, uint64_t vocab_hash);

// Running sums of model probability per (history, word). The history's
// `count` field is the number of positions whose prefix ended in it.
class ProbAccumulator {
 public:
  ProbAccumulator() = default;
  ProbAccumulator(uint64_t vocab_hash, int max_order)
      : table_(vocab_hash, max_order) {}

  int max_order() const { return table_.max_order(); }
  uint64_t vocab_hash() const { return table_.vocab_hash(); }

  // Throws UsageError unless 0 < p <= 1.
  void Accumulate(std::span<const TokenId> history, TokenId w, double p);
  void AddPosition(std::span<const TokenId> history);

  const MassCell *Find(std::span<const TokenId> history, TokenId w) const {
    return table_.Find(history, w);
  }
  uint64_t Positions(std::span<const TokenId> history) const;

  const ContextTable<MassCell> &table() const { return table_; }
  ContextTable<MassCell> &mutable_table() { return table_; }
  bool empty() const { return table_.empty(); }

  void Merge(const ProbAccumulator &other) { table_.Merge(other.table_); }

  void Write(std::ostream &os) const;
  static ProbAccumulator Read(std::istream &is);

  bool operator==(const ProbAccumulator &o) const { return table_ == o.table_; }

 private:
  ContextTable<MassCell> table_;
};

}  // namespace swlm

#endif  // SWLM_NGRAM_COUNTS_H_
