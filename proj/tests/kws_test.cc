#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "swlm/kws.h"
#include "swlm/model_builder.h"
#include "test_support.h"

namespace swlm {
namespace {

Detection Det(const std::string &kw, double begin, double dur, double score) {
  return {{kw, begin, dur}, score};
}

ReferenceSet Refs(std::vector<Occurrence> occ, double total) {
  ReferenceSet r;
  r.occurrences = std::move(occ);
  r.total_duration = total;
  return r;
}

// Straight re-evaluation of TWV at one threshold from the hit labels.
double OracleTwv(const Alignment &al, const ReferenceSet &refs, double theta,
                 double beta) {
  std::map<std::string, std::pair<double, double>> nref;  // count, time
  for (const auto &o : refs.occurrences) {
    nref[o.keyword].first += 1;
    nref[o.keyword].second += o.duration;
  }
  double sum = 0;
  for (const auto &[kw, rt] : nref) {
    double hits = 0, fas = 0;
    for (size_t i = 0; i < al.detections.size(); ++i) {
      const auto &d = al.detections[i];
      if (d.where.keyword != kw || d.score < theta) continue;
      (al.hit[i] ? hits : fas) += 1;
    }
    sum += (1 - hits / rt.first) + beta * fas / (refs.total_duration - rt.second);
  }
  return 1 - sum / static_cast<double>(nref.size());
}

// Value of the step curve at an arbitrary threshold.
double CurveAt(const TwvResult &r, double theta) {
  for (size_t i = 0; i < r.thresholds.size(); ++i)
    if (r.thresholds[i] >= theta) return r.twv[i];
  return 0.0;
}

TEST(Align, MidpointExamples) {
  auto refs = Refs({{"k", 1.0, 0.5}}, 10);
  auto al = Align({Det("k", 1.1, 0.5, 1.0)}, refs);
  EXPECT_TRUE(al.hit[0]);
  EXPECT_EQ(al.missed, 0u);

  al = Align({Det("other", 1.1, 0.5, 1.0)}, refs);
  EXPECT_FALSE(al.hit[0]);
  EXPECT_EQ(al.missed, 1u);

  al = Align({Det("k", 3.0, 0.5, 1.0)}, refs);
  EXPECT_FALSE(al.hit[0]);
}

TEST(Align, GreedyTieBreaks) {
  auto refs = Refs({{"k", 1.0, 1.0}}, 10);  // midpoint 1.5
  // closer midpoint wins over higher score
  auto al = Align({Det("k", 1.3, 1.0, 0.9), Det("k", 0.9, 1.0, 0.1)}, refs);
  EXPECT_FALSE(al.hit[0]);
  EXPECT_TRUE(al.hit[1]);
  // equal distance: higher score wins
  al = Align({Det("k", 0.8, 1.0, 0.2), Det("k", 1.2, 1.0, 0.7)}, refs);
  EXPECT_FALSE(al.hit[0]);
  EXPECT_TRUE(al.hit[1]);
  // one detection cannot take two references
  auto two = Refs({{"k", 1.0, 1.0}, {"k", 1.2, 1.0}}, 10);
  al = Align({Det("k", 1.1, 1.0, 0.5)}, two);
  EXPECT_TRUE(al.hit[0]);
  EXPECT_EQ(al.missed, 1u);
  EXPECT_THROW(Align({}, refs, 0.0), UsageError);
}

TEST(Twv, PerfectAndEmpty) {
  auto refs = Refs({{"a", 1, 1}, {"a", 5, 1}, {"b", 9, 1}}, 20);
  auto al = Align({Det("a", 1, 1, -3), Det("a", 5, 1, 0.2), Det("b", 9, 1, 7)}, refs);
  auto r = TwvCurve(al, refs);
  EXPECT_DOUBLE_EQ(r.mtwv, 1.0);
  EXPECT_DOUBLE_EQ(r.best_threshold, -3);
  EXPECT_DOUBLE_EQ(r.recall, 1.0);
  EXPECT_EQ(r.keywords, 2u);

  auto empty = TwvCurve(Align({}, refs), refs);
  EXPECT_DOUBLE_EQ(empty.mtwv, 0.0);
  EXPECT_TRUE(std::isinf(empty.best_threshold));
  EXPECT_DOUBLE_EQ(empty.recall, 0.0);

  EXPECT_THROW(TwvCurve(Align({}, refs), Refs({}, 10)), DataError);
}

TEST(Twv, TwoKeywordExample) {
  auto refs = Refs({{"kw1", 10, 1}, {"kw2", 50, 1}}, 100);
  auto al = Align({Det("kw1", 10, 1, 0.9), Det("kw2", 80, 1, 0.3)}, refs);
  auto r = TwvCurve(al, refs);
  ASSERT_EQ(r.thresholds.size(), 2u);
  EXPECT_DOUBLE_EQ(r.thresholds[0], 0.3);
  EXPECT_NEAR(r.twv[1], 0.5, 1e-12);
  EXPECT_NEAR(r.twv[0], 0.5 - kDefaultBeta / 99.0 / 2.0, 1e-9);
  EXPECT_NEAR(r.mtwv, 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(r.best_threshold, 0.9);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  ASSERT_EQ(r.rates.size(), 2u);
  EXPECT_DOUBLE_EQ(r.rates[1].p_miss, 1.0);
  EXPECT_DOUBLE_EQ(r.rates[1].p_fa, 0.0);
}

TEST(Twv, ExcludesKeywordsWithoutReferences) {
  auto refs = Refs({{"a", 1, 1}}, 10);
  auto al = Align({Det("a", 1, 1, 0.5), Det("zz", 4, 1, 0.9)}, refs);
  auto r = TwvCurve(al, refs);
  EXPECT_EQ(r.keywords, 1u);
  EXPECT_DOUBLE_EQ(r.mtwv, 1.0);
}

struct Case {
  ReferenceSet refs;
  DetectionSet dets;
};

Case RandomCase(std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> pos(0, 95), dur(0.3, 1.5), jitter(-0.6, 0.6);
  Case c;
  c.refs.total_duration = 100;
  size_t nref = 1 + rng() % 6;
  for (size_t i = 0; i < nref; ++i)
    c.refs.occurrences.push_back({"k" + std::to_string(rng() % 3), pos(rng), dur(rng)});
  size_t ndet = rng() % 21;
  for (size_t i = 0; i < ndet; ++i) {
    double score = static_cast<double>(rng() % 10) / 10.0;  // ties on purpose
    if (rng() % 2) {
      const auto &o = c.refs.occurrences[rng() % nref];
      c.dets.push_back(Det(o.keyword, o.begin + jitter(rng), o.duration, score));
    } else {
      c.dets.push_back(Det("k" + std::to_string(rng() % 4), pos(rng), dur(rng), score));
    }
  }
  return c;
}

TEST(Twv, MatchesBruteForceOracle) {
  std::mt19937_64 rng(77);
  for (int n = 0; n < 100; ++n) {
    Case c = RandomCase(rng);
    auto al = Align(c.dets, c.refs);
    for (double beta : {kDefaultBeta, 2.0}) {
      auto r = TwvCurve(al, c.refs, beta);
      std::set<double> scores;
      for (const auto &d : c.dets) scores.insert(d.score);
      ASSERT_EQ(r.thresholds, std::vector<double>(scores.begin(), scores.end()));
      double best = c.dets.empty() ? 0.0 : -INFINITY;
      for (size_t i = 0; i < r.thresholds.size(); ++i) {
        double o = OracleTwv(al, c.refs, r.thresholds[i], beta);
        EXPECT_NEAR(r.twv[i], o, 1e-9);
        EXPECT_LE(r.twv[i], 1.0);
        best = std::max(best, o);
      }
      EXPECT_NEAR(r.mtwv, best, 1e-9);
      if (!c.dets.empty())
        EXPECT_NEAR(OracleTwv(al, c.refs, r.best_threshold, beta), r.mtwv, 1e-9);
      EXPECT_GE(r.recall, 0.0);
      EXPECT_LE(r.recall, 1.0);
    }
  }
}

TEST(Twv, MonotoneTransformInvariance) {
  std::mt19937_64 rng(78);
  for (int n = 0; n < 50; ++n) {
    Case c = RandomCase(rng);
    auto r = TwvCurve(Align(c.dets, c.refs), c.refs);
    for (auto &d : c.dets) d.score = std::exp(3 * d.score) - 5;
    auto t = TwvCurve(Align(c.dets, c.refs), c.refs);
    EXPECT_NEAR(r.mtwv, t.mtwv, 1e-12);
    EXPECT_EQ(r.twv.size(), t.twv.size());
    EXPECT_DOUBLE_EQ(r.recall, t.recall);
  }
}

TEST(Twv, FalseAlarmsAndHitsAreMonotone) {
  std::mt19937_64 rng(79);
  for (int n = 0; n < 50; ++n) {
    Case c = RandomCase(rng);
    auto base = TwvCurve(Align(c.dets, c.refs), c.refs);
    const auto &o = c.refs.occurrences[0];

    // a false alarm for a referenced keyword far from its occurrences
    Case fa = c;
    fa.refs.occurrences.push_back({o.keyword, 200, 1});
    fa.refs.total_duration = 300;
    Case base_far = c;
    base_far.refs = fa.refs;
    auto before = TwvCurve(Align(base_far.dets, base_far.refs), base_far.refs);
    fa.dets.push_back(Det(o.keyword, 250, 1, 0.45));
    auto after = TwvCurve(Align(fa.dets, fa.refs), fa.refs);
    for (double th : after.thresholds) {
      if (th <= 0.45) EXPECT_LE(CurveAt(after, th), CurveAt(before, th) + 1e-12);
      else EXPECT_NEAR(CurveAt(after, th), CurveAt(before, th), 1e-12);
    }

    // an exact hit on a fresh occurrence
    Case hit = base_far;
    hit.dets.push_back(Det(o.keyword, 200, 1, 0.55));
    auto more = TwvCurve(Align(hit.dets, hit.refs), hit.refs);
    for (double th : more.thresholds)
      if (th <= 0.55) EXPECT_GE(CurveAt(more, th), CurveAt(before, th) - 1e-12);
    EXPECT_GE(more.recall, before.recall);
    (void)base;
  }
}

TEST(Twv, SweepReportFormat) {
  auto refs = Refs({{"a", 1, 1}}, 10);
  SweepRow row{"K=1", TwvCurve(Align({Det("a", 1, 1, 0.5)}, refs), refs), 12, 3.5};
  std::string rep = SweepReport({row});
  EXPECT_EQ(rep.substr(0, rep.find('\n')),
            "label\tmtwv\tthreshold\trecall\tkeywords\tngrams\tperplexity");
  EXPECT_NE(rep.find("K=1\t1"), std::string::npos) << rep;
}

TEST(KwsFiles, RoundTrip) {
  auto dir = testing::TempDir("kws");
  auto refs = Refs({{"a", 1.25, 0.5}, {"b", 3, 1}}, 42);
  WriteReferences((dir / "r.txt").string(), refs);
  auto r = ReadReferences((dir / "r.txt").string());
  EXPECT_DOUBLE_EQ(r.total_duration, 42);
  ASSERT_EQ(r.occurrences.size(), 2u);
  EXPECT_EQ(r.occurrences[1].keyword, "b");
  EXPECT_DOUBLE_EQ(r.occurrences[0].begin, 1.25);

  DetectionSet dets{Det("a", 1, 0.5, -0.75), Det("b", 2, 1, 0.125)};
  WriteDetections((dir / "d.txt").string(), dets);
  auto d = ReadDetections((dir / "d.txt").string());
  ASSERT_EQ(d.size(), 2u);
  EXPECT_DOUBLE_EQ(d[0].score, -0.75);
  EXPECT_EQ(d[1].where.keyword, "b");

  std::ofstream((dir / "bad.txt").string()) << "a 1 x 0.5\n";
  EXPECT_THROW(ReadDetections((dir / "bad.txt").string()), DataError);
  std::ofstream((dir / "nohead.txt").string()) << "a 1 1\n";
  EXPECT_THROW(ReadReferences((dir / "nohead.txt").string()), DataError);
}

TEST(EditDistance, Graphemes) {
  EXPECT_EQ(GraphemeEditDistance("kitten", "sitting"), 3u);
  EXPECT_EQ(GraphemeEditDistance("", "abc"), 3u);
  // e + combining acute is one grapheme
  EXPECT_EQ(GraphemeEditDistance("cafe\xcc\x81", "cafe"), 1u);
  EXPECT_EQ(GraphemeEditDistance("\xd9\x83\xd8\xaa\xd8\xa8", "\xd9\x83\xd8\xaa"), 1u);
}

TEST(Surrogate, FindsKeywordsInFixture) {
  auto train_words = ReadWordLines(testing::DataPath("train_words.txt"));
  auto test_words = ReadWordLines(testing::DataPath("test_words.txt"));
  SegmentationMap map = SegmentationMap::Read(testing::DataPath("segmentation.tsv"));
  MarkingScheme scheme;
  TextCorpus train;
  for (const auto &s : train_words) {
    std::vector<std::string> toks;
    for (const auto &w : s) {
      auto u = SegmentWord(w, scheme, &map);
      toks.insert(toks.end(), u.begin(), u.end());
    }
    train.push_back(toks);
  }
  auto v = Vocabulary::FromCorpus(train);
  GrowConfig cfg;
  auto lm = GrowKn(CountNgrams(ToIds(train, v), 3, v.Hash()), v, cfg);

  std::vector<Keyword> kws{{"KW1", "tanilo"}, {"KW2", "sumeka"}};
  auto refs = BuildReferences(test_words, kws);
  ASSERT_FALSE(refs.occurrences.empty());
  double words = 0;
  for (const auto &s : test_words) words += static_cast<double>(s.size());
  EXPECT_DOUBLE_EQ(refs.total_duration, words);

  auto dets = SimulateDetections(lm, test_words, kws, scheme, &map);
  EXPECT_NO_THROW(ValidateDetections(dets));
  auto r = TwvCurve(Align(dets, refs), refs);
  EXPECT_GT(r.recall, 0.0);
  EXPECT_LE(r.mtwv, 1.0);
  // with an open beam every exact occurrence is hypothesized
  SurrogateConfig open;
  open.beam = -1e9;
  auto all = SimulateDetections(lm, test_words, kws, scheme, &map, open);
  EXPECT_GE(all.size(), dets.size());
  EXPECT_DOUBLE_EQ(TwvCurve(Align(all, refs), refs).recall, 1.0);
  // deterministic
  auto again = SimulateDetections(lm, test_words, kws, scheme, &map);
  ASSERT_EQ(again.size(), dets.size());
  for (size_t i = 0; i < dets.size(); ++i) EXPECT_EQ(again[i].score, dets[i].score);
}

}  // namespace
}  // namespace swlm
