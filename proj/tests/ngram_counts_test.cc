#include <gtest/gtest.h>

#include <sstream>

#include "swlm/ngram_counts.h"
#include "test_support.h"

namespace swlm {
namespace {

using testing::G;
using testing::Text;

TEST(CountNgrams, TwoSentences) {
  auto v = testing::VocabOf({"a", "b", "c"});
  auto c = CountNgrams(ToIds(Text({"a b", "a c"}), v), 2, v.Hash());
  EXPECT_EQ(c.Count(G(v, "a")), 2u);
  EXPECT_EQ(c.Count(G(v, "<s> a")), 2u);
  EXPECT_EQ(c.Count(G(v, "a b")), 1u);
  EXPECT_EQ(c.Count(G(v, "a c")), 1u);
  EXPECT_EQ(c.Count(G(v, "b </s>")), 1u);
  EXPECT_EQ(c.Count(G(v, "b c")), 0u);
  // <s> is history only
  EXPECT_EQ(c.Count(G(v, "<s>")), 0u);
  EXPECT_EQ(c.HistoryCount(G(v, "a")), 2u);
  EXPECT_EQ(c.TotalPredictions(), 6u);
}

TEST(CountNgrams, SlidingWindow) {
  auto v = testing::VocabOf({"a"});
  auto c = CountNgrams(ToIds(Text({"a a a"}), v), 3, v.Hash());
  EXPECT_EQ(c.Count(G(v, "a")), 3u);
  EXPECT_EQ(c.Count(G(v, "a a")), 2u);
  EXPECT_EQ(c.Count(G(v, "a a a")), 1u);
  EXPECT_EQ(c.Count(G(v, "<s> a a")), 1u);
}

TEST(CountNgrams, EmptyAndBadOrder) {
  auto v = testing::VocabOf({"a"});
  EXPECT_TRUE(CountNgrams({}, 2, v.Hash()).empty());
  EXPECT_THROW(CountNgrams({}, 0, v.Hash()), UsageError);
}

TEST(CountNgrams, InvariantsOnRandomCorpus) {
  auto text = testing::RandomText(3, 60, 7, 9);
  auto v = Vocabulary::FromCorpus(text);
  auto corpus = ToIds(text, v);
  auto c = CountNgrams(corpus, 4, v.Hash());
  uint64_t unigrams = 0;
  for (const auto &[w, n] : c.table().Find(Gram{})->entries()) unigrams += n;
  EXPECT_EQ(unigrams, CountPredictions(corpus));
  // c(prefix) >= c(extension) for every stored extension
  for (size_t len = 1; len < 4; ++len) {
    for (const auto &[h, ctx] : c.table().Histories(len)) {
      for (const auto &[w, n] : ctx.entries()) {
        EXPECT_GE(n, 1u);
        if (!(h.size() == 1 && h[0] == Vocabulary::kBos))
          EXPECT_GE(c.Count(h), n);
      }
    }
  }
}

CountTrie CountShards(const Corpus &corpus, size_t shards, uint64_t hash) {
  CountTrie total(hash, 3);
  for (size_t s = 0; s < shards; ++s) {
    Corpus part;
    for (size_t i = s; i < corpus.size(); i += shards) part.push_back(corpus[i]);
    total.Merge(CountNgrams(part, 3, hash));
  }
  return total;
}

TEST(CountTrie, ShardMergeEqualsSinglePass) {
  auto text = testing::RandomText(11, 80, 6, 7);
  auto v = Vocabulary::FromCorpus(text);
  auto corpus = ToIds(text, v);
  auto whole = CountNgrams(corpus, 3, v.Hash());
  EXPECT_EQ(CountShards(corpus, 4, v.Hash()), whole);
  EXPECT_EQ(CountShards(corpus, 1, v.Hash()), whole);
}

TEST(CountTrie, MergeCommutesAndHasIdentity) {
  auto text = testing::RandomText(5, 40, 5, 6);
  auto v = Vocabulary::FromCorpus(text);
  auto corpus = ToIds(text, v);
  Corpus a(corpus.begin(), corpus.begin() + 15), b(corpus.begin() + 15, corpus.end());
  auto ca = CountNgrams(a, 3, v.Hash());
  auto cb = CountNgrams(b, 3, v.Hash());
  auto ab = ca, ba = cb;
  ab.Merge(cb);
  ba.Merge(ca);
  EXPECT_EQ(ab, ba);
  auto x = ca;
  x.Merge(CountTrie(v.Hash(), 3));
  EXPECT_EQ(x, ca);
}

TEST(CountTrie, MergeRejectsMismatch) {
  CountTrie a(1, 3), b(2, 3), c(1, 2);
  EXPECT_THROW(a.Merge(b), DataError);
  EXPECT_THROW(a.Merge(c), DataError);
}

TEST(CountTrie, SnapshotRoundTrip) {
  auto text = testing::RandomText(9, 30, 5, 6);
  auto v = Vocabulary::FromCorpus(text);
  auto c = CountNgrams(ToIds(text, v), 3, v.Hash());
  std::stringstream ss;
  c.Write(ss);
  EXPECT_EQ(CountTrie::Read(ss), c);
  std::stringstream bad("XXXX1234");
  EXPECT_THROW(CountTrie::Read(bad), DataError);
}

TEST(ProbAccumulator, Additivity) {
  auto v = testing::VocabOf({"a", "b"});
  ProbAccumulator acc(v.Hash(), 2);
  acc.Accumulate(G(v, "a"), *v.Find("b"), 0.4);
  acc.Accumulate(G(v, "a"), *v.Find("b"), 0.2);
  const MassCell *c = acc.Find(G(v, "a"), *v.Find("b"));
  ASSERT_TRUE(c);
  EXPECT_NEAR(c->sum, 0.6, 1e-15);
  EXPECT_EQ(c->hits, 2u);
  EXPECT_THROW(acc.Accumulate(G(v, "a"), *v.Find("b"), 0.0), UsageError);
  EXPECT_THROW(acc.Accumulate(G(v, "a"), *v.Find("b"), 1.5), UsageError);
}

TEST(ProbAccumulator, MergeShards) {
  auto v = testing::VocabOf({"a", "b"});
  ProbAccumulator x(v.Hash(), 2), y(v.Hash(), 2);
  x.Accumulate(G(v, "a"), *v.Find("b"), 0.3);
  y.Accumulate(G(v, "a"), *v.Find("b"), 0.3);
  x.Merge(y);
  const MassCell *c = x.Find(G(v, "a"), *v.Find("b"));
  EXPECT_NEAR(c->sum, 0.6, 1e-15);
  EXPECT_EQ(c->hits, 2u);
  std::stringstream ss;
  x.Write(ss);
  EXPECT_EQ(ProbAccumulator::Read(ss), x);
}

}  // namespace
}  // namespace swlm
