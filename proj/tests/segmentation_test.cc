#include <gtest/gtest.h>

#include <fstream>

#include "swlm/corpus_io.h"
#include "swlm/segmentation.h"
#include "test_support.h"

namespace swlm {
namespace {

using testing::Words;

MarkingScheme Right() { return MarkingScheme::Parse("right"); }
MarkingScheme Both() { return MarkingScheme::Parse("both"); }

SegmentationMap InterMap() {
  SegmentationMap m;
  m.Add("international", {"inter", "nation", "al"});
  return m;
}

TEST(Segmentation, RightMarkedWithMap) {
  auto map = InterMap();
  EXPECT_EQ(SegmentWord("international", Right(), &map),
            Words("inter+ nation+ al"));
}

TEST(Segmentation, BothMarkedWithMap) {
  auto map = InterMap();
  EXPECT_EQ(SegmentWord("international", Both(), &map),
            Words("inter+ +nation+ +al"));
}

TEST(Segmentation, CharacterFallback) {
  EXPECT_EQ(SegmentWord("a", Right()), Words("a"));
  EXPECT_EQ(SegmentWord("abc", Right()), Words("a+ b+ c"));
  EXPECT_EQ(SegmentWord("abc", Both()), Words("a+ +b+ +c"));
  auto map = InterMap();
  EXPECT_EQ(SegmentWord("xy", Right(), &map), Words("x+ y"));
}

TEST(Segmentation, GraphemeClusters) {
  // "e" + combining acute stays one unit; Arabic letters split per letter.
  std::string word = "e\xCC\x81" "b";
  EXPECT_EQ(SegmentWord(word, Right()),
            (std::vector<std::string>{"e\xCC\x81+", "b"}));
  EXPECT_EQ(Graphemes("\xD9\x83\xD8\xAA\xD8\xA8").size(), 3u);
}

TEST(Segmentation, RejectsMarkerAndEmpty) {
  EXPECT_THROW(SegmentWord("a+b", Right()), Error);
  EXPECT_THROW(SegmentWord("", Right()), Error);
  MarkingScheme hash = MarkingScheme::Parse("right", "#");
  EXPECT_EQ(SegmentWord("a+b", hash), Words("a# +# b"));
}

TEST(Segmentation, MapMustConcatenate) {
  SegmentationMap m;
  EXPECT_THROW(m.Add("abc", {"ab", "d"}), Error);
}

TEST(Reconstruct, Examples) {
  EXPECT_EQ(Reconstruct(Words("inter+ nation+ al"), Right()), Words("international"));
  EXPECT_TRUE(Reconstruct(std::vector<std::string>{}, Right()).empty());
  EXPECT_TRUE(Reconstruct(std::vector<std::string>{}, Both()).empty());
  EXPECT_EQ(Reconstruct(Words("a+ b+ c d"), Right()), Words("abc d"));
  EXPECT_EQ(Reconstruct(Words("inter+ +nation+ +al x"), Both()),
            Words("international x"));
}

TEST(Reconstruct, Errors) {
  EXPECT_THROW(Reconstruct(Words("a+ b+"), Right()), Error);
  EXPECT_THROW(Reconstruct(Words("a+ b"), Both()), Error);   // missing left mark
  EXPECT_THROW(Reconstruct(Words("a +b"), Both()), Error);   // stray left mark
}

TEST(Reconstruct, RoundTripProperty) {
  auto map = InterMap();
  for (const auto &scheme : {Right(), Both()}) {
    for (std::string w : {"a", "ab", "international", "k\xC3\xA4vely", "xyz"}) {
      auto toks = SegmentWord(w, scheme, &map);
      EXPECT_EQ(Reconstruct(toks, scheme), std::vector<std::string>{w});
      // marker grammar: non-final units carry the right marker
      for (size_t i = 0; i < toks.size(); ++i) {
        bool right = toks[i].ends_with("+") && toks[i].size() > 1;
        EXPECT_EQ(right, i + 1 < toks.size()) << toks[i];
        if (scheme.variant == MarkingScheme::Variant::kBothMarked)
          EXPECT_EQ(toks[i].starts_with("+"), i > 0) << toks[i];
      }
    }
  }
}

TEST(OovKeywords, Examples) {
  EXPECT_EQ(ExtractOovKeywords(Words("ab bc"), Words("ab cab x")), Words("cab"));
  EXPECT_TRUE(ExtractOovKeywords(Words("ab bc"), Words("ab bc")).empty());
  EXPECT_EQ(ExtractOovKeywords(Words("ab"), Words("ba b")), Words("ba"));
}

TEST(OovKeywords, DisjointAndLongerThanOne) {
  auto train = Words("kata nilo su mekata");
  auto test = Words("kata tanilo s o sumeka q lox nilo");
  auto out = ExtractOovKeywords(train, test);
  for (const auto &w : out) {
    EXPECT_EQ(std::count(train.begin(), train.end(), w), 0);
    EXPECT_GT(Graphemes(w).size(), 1u);
  }
  EXPECT_EQ(out, Words("sumeka tanilo"));
}

TEST(LengthStats, SevenThirds) {
  TextCorpus corpus = {SegmentLine("ab ab abc", Right())};
  auto s = ComputeLengthStats(corpus, Words("ab abc"), Right());
  ASSERT_TRUE(s.Mean());
  EXPECT_EQ(s.occurrences, 3u);
  EXPECT_EQ(s.subwords, 7u);
  EXPECT_DOUBLE_EQ(*s.Mean(), 7.0 / 3.0);
}

TEST(LengthStats, SingleCharactersAndUndefined) {
  TextCorpus corpus = {SegmentLine("a b ab c", Right())};
  auto s = ComputeLengthStats(corpus, Words("a b c"), Right());
  EXPECT_DOUBLE_EQ(*s.Mean(), 1.0);
  auto none = ComputeLengthStats(corpus, Words("zz"), Right());
  EXPECT_FALSE(none.defined());
  EXPECT_FALSE(none.Mean());
}

TEST(Vocabulary, ReservedIdsAndBijection) {
  auto v = Vocabulary::FromCorpus(testing::Text({"b a", "c a"}));
  EXPECT_EQ(v.Token(Vocabulary::kBos), "<s>");
  EXPECT_EQ(v.Token(Vocabulary::kEos), "</s>");
  EXPECT_EQ(v.Token(Vocabulary::kUnk), "<unk>");
  EXPECT_EQ(v.size(), 6u);
  EXPECT_EQ(v.NumPredictable(), 5u);
  for (TokenId i = 0; i < v.size(); ++i) EXPECT_EQ(*v.Find(v.Token(i)), i);
  EXPECT_EQ(*v.Find("a"), 3u);
  EXPECT_EQ(v.IdOrUnk("zzz"), Vocabulary::kUnk);
  EXPECT_THROW(Vocabulary::FromTokens(Words("a a")), Error);
}

TEST(Vocabulary, FileRoundTrip) {
  auto dir = testing::TempDir("vocab");
  auto v = Vocabulary::FromTokens(Words("x y z"));
  v.Write((dir / "v.txt").string());
  auto r = Vocabulary::Read((dir / "v.txt").string());
  EXPECT_EQ(r, v);
  EXPECT_EQ(r.Hash(), v.Hash());
}

TEST(CorpusIo, ReadRejectsBoundaryTokens) {
  auto dir = testing::TempDir("corpus");
  std::string p = (dir / "c.txt").string();
  std::ofstream(p) << "a b\n\nc\n";
  auto t = ReadTextCorpus(p);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[1], Words("c"));
  std::ofstream(p) << "a </s> b\n";
  EXPECT_THROW(ReadTextCorpus(p), DataError);
}

TEST(CorpusIo, KeywordList) {
  auto dir = testing::TempDir("kwlist");
  std::string p = (dir / "k.txt").string();
  WriteKeywordList(p, {{"1", "tanilo"}, {"2", "su ta"}});
  auto k = ReadKeywordList(p);
  ASSERT_EQ(k.size(), 2u);
  EXPECT_EQ(k[1].text, "su ta");
  std::ofstream(p) << "x\tfoo\n";
  EXPECT_THROW(ReadKeywordList(p), DataError);
}

}  // namespace
}  // namespace swlm
