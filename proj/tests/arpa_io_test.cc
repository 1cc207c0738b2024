#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "swlm/backoff_model.h"
#include "swlm/model_builder.h"
#include "test_support.h"

namespace swlm {
namespace {

TEST(Arpa, ReservedOnlyUnigramText) {
  BackoffModel m{Vocabulary{}};
  m.Set(Gram{Vocabulary::kBos}, kLog10Floor);
  m.Set(Gram{Vocabulary::kEos}, std::log10(0.5));
  m.Set(Gram{Vocabulary::kUnk}, std::log10(0.5));
  const std::string expected =
      "\\data\\\n"
      "ngram 1=3\n"
      "\n"
      "\\1-grams:\n"
      "-99.00000000\t<s>\n"
      "-0.30103000\t</s>\n"
      "-0.30103000\t<unk>\n"
      "\n"
      "\\end\\\n";
  EXPECT_EQ(WriteArpa(m), expected);
}

TEST(Arpa, RoundTrip) {
  auto text = testing::RandomText(61, 50, 6, 8);
  auto v = Vocabulary::FromCorpus(text);
  GrowConfig cfg;
  cfg.n_max = 3;
  cfg.epsilon = 0.0;
  auto m = GrowKn(CountNgrams(ToIds(text, v), 3, v.Hash()), v, cfg);
  std::string first = WriteArpa(m);
  auto r = ReadArpaString(first);
  ASSERT_EQ(r.max_order(), m.max_order());
  EXPECT_TRUE(r.vocab() == m.vocab());
  for (int k = 1; k <= m.max_order(); ++k) {
    ASSERT_EQ(r.NumNgrams(k), m.NumNgrams(k));
    for (const auto &[g, e] : m.Order(k)) {
      const NgramEntry *o = r.Find(g);
      ASSERT_NE(o, nullptr);
      EXPECT_NEAR(o->log10_prob, e.log10_prob, 1e-6);
      EXPECT_EQ(o->has_bow, e.has_bow);
      if (e.has_bow) EXPECT_NEAR(o->log10_bow, e.log10_bow, 1e-6);
    }
  }
  EXPECT_EQ(WriteArpa(r), first);

  auto dir = testing::TempDir("arpa");
  auto path = (dir / "m.arpa").string();
  WriteArpaFile(m, path);
  EXPECT_EQ(WriteArpa(ReadArpaFile(path)), first);
}

std::string ErrorOf(const std::string &text) {
  try {
    ReadArpaString(text);
  } catch (const DataError &e) {
    return e.what();
  }
  return "";
}

TEST(Arpa, CountMismatchNamesLine) {
  std::string text =
      "\\data\\\nngram 1=4\n\n\\1-grams:\n-99\t<s>\n-0.3\t</s>\n-0.3\t<unk>\n\n\\end\\\n";
  std::string err = ErrorOf(text);
  EXPECT_NE(err.find(":9:"), std::string::npos) << err;
  EXPECT_NE(err.find("declared 4"), std::string::npos) << err;
}

TEST(Arpa, MalformedInput) {
  EXPECT_NE(ErrorOf("\\data\\\nngram one=3\n"), "");
  EXPECT_NE(ErrorOf("\\data\\\nngram 1=1\n\n\\1-grams:\n-0.1\ta\n"), "");  // no \end\.
  EXPECT_NE(ErrorOf("\\data\\\nngram 1=1\n\n\\one-grams:\n-0.1\ta\n\n\\end\\\n"), "");
  EXPECT_NE(ErrorOf("\\data\\\nngram 1=1\n\n\\1-grams:\n0.5\ta\n\n\\end\\\n"), "");
  EXPECT_NE(ErrorOf("\\data\\\nngram 1=1\n\n\\1-grams:\n-0.1\ta\n\n\\end\\\nmore\n"), "");
}

TEST(Arpa, RejectsMissingPrefix) {
  std::string text =
      "\\data\\\nngram 1=4\nngram 2=1\nngram 3=1\n\n"
      "\\1-grams:\n-99\t<s>\n-0.5\t</s>\n-1\t<unk>\n-0.5\ta\t-0.1\n\n"
      "\\2-grams:\n-0.2\ta a\n\n"
      "\\3-grams:\n-0.2\t<s> a a\n\n\\end\\\n";
  std::string err = ErrorOf(text);
  EXPECT_NE(err.find("prefix"), std::string::npos) << err;
  EXPECT_NE(err.find(":16:"), std::string::npos) << err;
}

TEST(Arpa, MissingReservedAreAdded) {
  auto m = ReadArpaString("\\data\\\nngram 1=2\n\n\\1-grams:\n-0.3\t</s>\n-0.3\ta\n\n\\end\\\n");
  EXPECT_NE(m.Find(Gram{Vocabulary::kBos}), nullptr);
  EXPECT_NE(m.Find(Gram{Vocabulary::kUnk}), nullptr);
  EXPECT_NEAR(m.Log10Prob({}, *m.vocab().Find("a")), -0.3, 1e-12);
}

}  // namespace
}  // namespace swlm
