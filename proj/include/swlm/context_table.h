#ifndef SWLM_CONTEXT_TABLE_H_
#define SWLM_CONTEXT_TABLE_H_

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "swlm/error.h"
#include "swlm/util.h"
#include "swlm/vocabulary.h"

namespace swlm {

// Serialization and merge rules for a table cell type.
template <typename Cell>
struct CellTraits;

template <>
struct CellTraits<uint64_t> {
  static void Add(uint64_t &into, const uint64_t &from) { into += from; }
  static void Write(std::ostream &os, const uint64_t &c) { bin::WriteVarint(os, c); }
  static uint64_t Read(std::istream &is) { return bin::ReadVarint(is); }
};

// Accumulated model probability for one (history, word) pair.
struct MassCell {
  double sum = 0.0;
  uint64_t hits = 0;
  bool operator==(const MassCell &) const = default;
};

template <>
struct CellTraits<MassCell> {
  static void Add(MassCell &into, const MassCell &from) {
    into.sum += from.sum;
    into.hits += from.hits;
  }
  static void Write(std::ostream &os, const MassCell &c) {
    bin::WriteF64(os, c.sum);
    bin::WriteVarint(os, c.hits);
  }
  static MassCell Read(std::istream &is) {
    MassCell c;
    c.sum = bin::ReadF64(is);
    c.hits = bin::ReadVarint(is);
    return c;
  }
};

// Histories of length 0..max_order-1, each with a position count and the
// cells of the words that followed it. Per-history lookups touch only that
// history's entries.
template <typename Cell>
class ContextTable {
 public:
  class Context {
   public:
    uint64_t count = 0;

    Cell &At(TokenId w) {
      if (auto *c = Lookup(w)) return *c;
      entries_.emplace_back(w, Cell{});
      if (!index_.empty() || entries_.size() > kIndexThreshold) {
        if (index_.empty()) {
          for (uint32_t i = 0; i < entries_.size(); ++i)
            index_.emplace(entries_[i].first, i);
        } else {
          index_.emplace(w, static_cast<uint32_t>(entries_.size() - 1));
        }
      }
      return entries_.back().second;
    }

    const Cell *Find(TokenId w) const {
      return const_cast<Context *>(this)->Lookup(w);
    }

    const std::vector<std::pair<TokenId, Cell>> &entries() const {
      return entries_;
    }
    size_t size() const { return entries_.size(); }

    // Entries ordered by token id.
    std::vector<std::pair<TokenId, Cell>> Sorted() const {
      auto out = entries_;
      std::sort(out.begin(), out.end(),
                [](const auto &a, const auto &b) { return a.first < b.first; });
      return out;
    }

   private:
    static constexpr size_t kIndexThreshold = 16;

    Cell *Lookup(TokenId w) {
      if (!index_.empty()) {
        auto it = index_.find(w);
        return it == index_.end() ? nullptr : &entries_[it->second].second;
      }
      for (auto &e : entries_)
        if (e.first == w) return &e.second;
      return nullptr;
    }

    std::vector<std::pair<TokenId, Cell>> entries_;
    std::unordered_map<TokenId, uint32_t> index_;
  };

  using HistoryMap = std::unordered_map<Gram, Context, GramHash>;

  ContextTable() = default;
  ContextTable(uint64_t vocab_hash, int max_order)
      : vocab_hash_(vocab_hash), by_length_(static_cast<size_t>(max_order)) {
    if (max_order < 1) throw UsageError("n-gram order must be >= 1");
  }

  uint64_t vocab_hash() const { return vocab_hash_; }
  int max_order() const { return static_cast<int>(by_length_.size()); }

  Context &Touch(std::span<const TokenId> history) {
    CheckLength(history.size());
    return by_length_[history.size()][Gram(history.begin(), history.end())];
  }

  const Context *Find(std::span<const TokenId> history) const {
    if (history.size() >= by_length_.size()) return nullptr;
    const auto &m = by_length_[history.size()];
    auto it = m.find(Gram(history.begin(), history.end()));
    return it == m.end() ? nullptr : &it->second;
  }

  const Cell *Find(std::span<const TokenId> history, TokenId w) const {
    const Context *c = Find(history);
    return c ? c->Find(w) : nullptr;
  }

  const HistoryMap &Histories(size_t length) const {
    CheckLength(length);
    return by_length_[length];
  }

  // Histories of one length in lexicographic token-id order.
  std::vector<const Gram *> SortedHistories(size_t length) const {
    std::vector<const Gram *> out;
    for (const auto &[g, c] : Histories(length)) out.push_back(&g);
    std::sort(out.begin(), out.end(),
              [](const Gram *a, const Gram *b) { return *a < *b; });
    return out;
  }

  // Number of (history, word) entries whose history has the given length;
  // these are the stored grams of order length+1.
  size_t NumEntries(size_t history_length) const {
    size_t n = 0;
    for (const auto &[g, c] : Histories(history_length)) n += c.size();
    return n;
  }

  bool empty() const {
    for (const auto &m : by_length_)
      if (!m.empty()) return false;
    return true;
  }

  void CheckCompatible(const ContextTable &other) const {
    if (other.vocab_hash_ != vocab_hash_)
      throw DataError("cannot merge tables built over different vocabularies");
    if (other.by_length_.size() != by_length_.size())
      throw DataError("cannot merge tables of different orders");
  }

  // Pointwise sum. Entries new to this table are appended in `other`'s
  // sorted order so the result does not depend on hash iteration.
  void Merge(const ContextTable &other) {
    CheckCompatible(other);
    for (size_t len = 0; len < by_length_.size(); ++len) {
      for (const Gram *g : other.SortedHistories(len)) {
        const Context &src = other.by_length_[len].at(*g);
        Context &dst = by_length_[len][*g];
        dst.count += src.count;
        for (const auto &[w, cell] : src.Sorted())
          CellTraits<Cell>::Add(dst.At(w), cell);
      }
    }
  }

  void Write(std::ostream &os) const {
    bin::WriteU64(os, vocab_hash_);
    bin::WriteU32(os, static_cast<uint32_t>(by_length_.size()));
    for (size_t len = 0; len < by_length_.size(); ++len) {
      auto hs = SortedHistories(len);
      bin::WriteU64(os, hs.size());
      for (const Gram *g : hs) {
        for (TokenId t : *g) bin::WriteVarint(os, t);
        const Context &c = by_length_[len].at(*g);
        bin::WriteVarint(os, c.count);
        auto entries = c.Sorted();
        bin::WriteVarint(os, entries.size());
        for (const auto &[w, cell] : entries) {
          bin::WriteVarint(os, w);
          CellTraits<Cell>::Write(os, cell);
        }
      }
    }
  }

  static ContextTable Read(std::istream &is) {
    uint64_t hash = bin::ReadU64(is);
    uint32_t order = bin::ReadU32(is);
    if (order == 0 || order > 1000) throw DataError("bad table order");
    ContextTable t(hash, static_cast<int>(order));
    for (size_t len = 0; len < order; ++len) {
      uint64_t n = bin::ReadU64(is);
      for (uint64_t i = 0; i < n; ++i) {
        Gram g(len);
        for (auto &tok : g) tok = static_cast<TokenId>(bin::ReadVarint(is));
        Context &c = t.by_length_[len][g];
        c.count = bin::ReadVarint(is);
        uint64_t m = bin::ReadVarint(is);
        for (uint64_t j = 0; j < m; ++j) {
          TokenId w = static_cast<TokenId>(bin::ReadVarint(is));
          c.At(w) = CellTraits<Cell>::Read(is);
        }
      }
    }
    return t;
  }

  bool operator==(const ContextTable &other) const {
    if (vocab_hash_ != other.vocab_hash_ ||
        by_length_.size() != other.by_length_.size())
      return false;
    for (size_t len = 0; len < by_length_.size(); ++len) {
      const auto &a = by_length_[len];
      const auto &b = other.by_length_[len];
      if (a.size() != b.size()) return false;
      for (const auto &[g, c] : a) {
        auto it = b.find(g);
        if (it == b.end() || it->second.count != c.count ||
            it->second.Sorted() != c.Sorted())
          return false;
      }
    }
    return true;
  }

 private:
  void CheckLength(size_t len) const {
    if (len >= by_length_.size())
      throw UsageError("history length " + std::to_string(len) +
                       " exceeds table order " +
                       std::to_string(by_length_.size()));
  }

  uint64_t vocab_hash_ = 0;
  std::vector<HistoryMap> by_length_;
};

}  // namespace swlm

#endif  // SWLM_CONTEXT_TABLE_H_
