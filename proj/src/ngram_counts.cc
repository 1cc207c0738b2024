#include "swlm/ngram_counts.h"

#include <fstream>
#include <istream>
#include <ostream>

namespace swlm {

namespace {
constexpr uint32_t kCountsVersion = 1;
constexpr uint32_t kAccVersion = 1;
}  // namespace

void CountTrie::AddSentence(std::span<const TokenId> sentence) {
  Gram padded;
  padded.reserve(sentence.size() + 2);
  padded.push_back(Vocabulary::kBos);
  padded.insert(padded.end(), sentence.begin(), sentence.end());
  padded.push_back(Vocabulary::kEos);
  const size_t max_hist = static_cast<size_t>(max_order()) - 1;
  for (size_t i = 1; i < padded.size(); ++i) {
    for (size_t len = 0; len <= std::min(max_hist, i); ++len) {
      auto &ctx = table_.Touch(std::span(padded).subspan(i - len, len));
      ++ctx.count;
      ++ctx.At(padded[i]);
    }
  }
}

uint64_t CountTrie::Count(std::span<const TokenId> gram) const {
  if (gram.empty() || gram.size() > static_cast<size_t>(max_order())) return 0;
  const uint64_t *c = table_.Find(gram.first(gram.size() - 1), gram.back());
  return c ? *c : 0;
}

uint64_t CountTrie::HistoryCount(std::span<const TokenId> history) const {
  const auto *ctx = table_.Find(history);
  return ctx ? ctx->count : 0;
}

uint64_t CountTrie::TotalPredictions() const {
  return HistoryCount(std::span<const TokenId>());
}

void CountTrie::Write(std::ostream &os) const {
  bin::WriteHeader(os, "SWCT", kCountsVersion);
  table_.Write(os);
}

CountTrie CountTrie::Read(std::istream &is) {
  bin::ExpectHeader(is, "SWCT", kCountsVersion);
  CountTrie t;
  t.table_ = ContextTable<uint64_t>::Read(is);
  return t;
}

void CountTrie::Save(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  Write(out);
}

CountTrie CountTrie::Load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return Read(in);
}

CountTrie CountNgrams(const Corpus &corpus, int max_order, uint64_t vocab_hash) {
  if (max_order < 1) throw UsageError("n_max must be >= 1");
  CountTrie trie(vocab_hash, max_order);
  for (const auto &s : corpus) trie.AddSentence(s);
  return trie;
}

void ProbAccumulator::Accumulate(std::span<const TokenId> history, TokenId w,
                                 double p) {
  if (!IsProbability(p))
    throw UsageError("accumulated probability must lie in (0,1], got " +
                     std::to_string(p));
  MassCell &cell = table_.Touch(history).At(w);
  cell.sum += p;
  ++cell.hits;
}

void ProbAccumulator::AddPosition(std::span<const TokenId> history) {
  ++table_.Touch(history).count;
}

uint64_t ProbAccumulator::Positions(std::span<const TokenId> history) const {
  const auto *ctx = table_.Find(history);
  return ctx ? ctx->count : 0;
}

void ProbAccumulator::Write(std::ostream &os) const {
  bin::WriteHeader(os, "SWPA", kAccVersion);
  table_.Write(os);
}

ProbAccumulator ProbAccumulator::Read(std::istream &is) {
  bin::ExpectHeader(is, "SWPA", kAccVersion);
  ProbAccumulator a;
  a.table_ = ContextTable<MassCell>::Read(is);
  return a;
}

}  // namespace swlm
