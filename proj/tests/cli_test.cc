#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "swlm/backoff_model.h"
#include "swlm/util.h"
#include "test_support.h"

namespace swlm {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

std::string Slurp(const fs::path &p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result Swlm(const fs::path &dir, const std::string &args) {
  std::string cmd = std::string("cd '") + dir.string() + "' && '" SWLM_BIN "' " + args +
                    " > stdout.txt 2> stderr.txt";
  int status = std::system(cmd.c_str());
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, Slurp(dir / "stdout.txt"), Slurp(dir / "stderr.txt")};
}

// Segmented fixture corpora, keyword list and an RNN shared by the tests.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(testing::TempDir("cli"));
    const std::string map = testing::DataPath("segmentation.tsv");
    ASSERT_EQ(Swlm(*dir_, "segment --map " + map + " --input " +
                              testing::DataPath("train_words.txt") + " -o train.txt")
                  .code, 0);
    ASSERT_EQ(Swlm(*dir_, "train-rnn --corpus train.txt --epochs 3 -o rnn.bin").code, 0);
    std::ofstream(*dir_ / "kw.txt") << "1\ttanilo\n2\tsumeka\n";
  }
  static void TearDownTestSuite() { delete dir_; }

  static std::string Kws() {
    return " --map " + testing::DataPath("segmentation.tsv") + " --test " +
           testing::DataPath("test_words.txt") + " --keywords kw.txt";
  }

  static fs::path *dir_;
};
fs::path *CliTest::dir_ = nullptr;

TEST_F(CliTest, ExitCodes) {
  auto r = Swlm(*dir_, "grow-kn --bogus 1");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("kind=usage"), std::string::npos) << r.err;
  EXPECT_EQ(Swlm(*dir_, "").code, 2);
  r = Swlm(*dir_, "grow-kn --corpus does_not_exist.txt -o x.arpa");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("error code=3 kind=data"), std::string::npos) << r.err;
  EXPECT_EQ(Swlm(*dir_, "grow-kn --corpus train.txt --epsilon -1 -o x.arpa").code, 2);
  EXPECT_EQ(Swlm(*dir_, "--help").code, 0);
}

TEST_F(CliTest, GrowRnnvWritesArpaAndManifest) {
  auto r = Swlm(*dir_, "grow-rnnv --corpus train.txt --rnn rnn.bin -k 3 -o rnnv.arpa");
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_TRUE(fs::exists(*dir_ / "rnnv.arpa"));
  ASSERT_TRUE(fs::exists(*dir_ / "rnnv.arpa.manifest.json"));
  auto m = ReadArpaFile((*dir_ / "rnnv.arpa").string());
  EXPECT_LT(ValidateNormalization(m).max_deviation, 1e-6);
  EXPECT_EQ(Swlm(*dir_, "arpa validate rnnv.arpa").code, 0);

  std::string first = Slurp(*dir_ / "rnnv.arpa");
  ASSERT_EQ(Swlm(*dir_, "grow-rnnv --corpus train.txt --rnn rnn.bin -k 3 -o rnnv.arpa").code, 0);
  EXPECT_EQ(Slurp(*dir_ / "rnnv.arpa"), first);
}

TEST_F(CliTest, InterpolateWithFullWeightIsModelA) {
  ASSERT_EQ(Swlm(*dir_, "grow-kn --corpus train.txt -n 3 -o a.arpa").code, 0);
  ASSERT_EQ(Swlm(*dir_, "grow-rnnv --corpus train.txt --rnn rnn.bin -n 2 -o b.arpa").code, 0);
  auto r = Swlm(*dir_, "interpolate a.arpa b.arpa --lambda 1 -o ab.arpa");
  ASSERT_EQ(r.code, 0) << r.err;
  auto a = ReadArpaFile((*dir_ / "a.arpa").string());
  auto ab = ReadArpaFile((*dir_ / "ab.arpa").string());
  auto text = ReadTextCorpus((*dir_ / "train.txt").string());
  auto corpus = ToIds(text, a.vocab());
  for (const auto &s : corpus) {
    std::vector<TokenId> h{Vocabulary::kBos};
    for (size_t i = 0; i <= s.size(); ++i) {
      TokenId w = i < s.size() ? s[i] : Vocabulary::kEos;
      EXPECT_NEAR(ab.Log10Prob(h, w), a.Log10Prob(h, w), 1e-6);
      h.push_back(w);
    }
  }
  EXPECT_EQ(Swlm(*dir_, "interpolate a.arpa b.arpa --lambda 2 -o ab.arpa").code, 2);
}

TEST_F(CliTest, SweepKAndVerify) {
  fs::path out = *dir_ / "sweepk";
  auto r = Swlm(*dir_, "sweep k --corpus train.txt --rnn rnn.bin --from 1 --to 6 -o sweepk" +
                           Kws());
  ASSERT_EQ(r.code, 0) << r.err;
  std::string report = Slurp(out / "report.tsv");
  auto lines = SplitOn(report, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  ASSERT_EQ(lines.size(), 7u) << report;
  EXPECT_EQ(lines[0].substr(0, 10), "label\tmtwv");
  EXPECT_EQ(lines[6].substr(0, 4), "K=6\t");
  for (int k = 1; k <= 6; ++k)
    EXPECT_TRUE(fs::exists(out / ("K_" + std::to_string(k) + ".arpa")));

  r = Swlm(*dir_, "verify sweepk");
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  std::ofstream(out / "K_3.arpa", std::ios::app) << "\n";
  r = Swlm(*dir_, "verify sweepk");
  EXPECT_NE(r.code, 0);
  EXPECT_NE((r.out + r.err).find("K_3.arpa"), std::string::npos) << r.out << r.err;
}

TEST_F(CliTest, SweepLambdaIsReproducible) {
  std::string args = "sweep lambda --corpus train.txt --rnn rnn.bin --values 0,0.5,1 -o lam" +
                     Kws();
  ASSERT_EQ(Swlm(*dir_, args).code, 0);
  std::string first = Slurp(*dir_ / "lam" / "report.tsv");
  std::string model = Slurp(*dir_ / "lam" / "lambda_0.5.arpa");
  ASSERT_FALSE(model.empty());
  ASSERT_EQ(Swlm(*dir_, args).code, 0);
  EXPECT_EQ(Slurp(*dir_ / "lam" / "report.tsv"), first);
  EXPECT_EQ(Slurp(*dir_ / "lam" / "lambda_0.5.arpa"), model);
}

TEST_F(CliTest, ConfigFileAndFlags) {
  std::ofstream(*dir_ / "grow.cfg") << "order=2\nepsilon=0\n";
  ASSERT_EQ(Swlm(*dir_, "--config grow.cfg grow-kn --corpus train.txt -o c2.arpa").code, 0);
  EXPECT_EQ(ReadArpaFile((*dir_ / "c2.arpa").string()).max_order(), 2);
  ASSERT_EQ(Swlm(*dir_, "--config grow.cfg grow-kn --corpus train.txt -n 3 -o c3.arpa").code, 0);
  EXPECT_EQ(ReadArpaFile((*dir_ / "c3.arpa").string()).max_order(), 3);
  std::string manifest = Slurp(*dir_ / "c3.arpa.manifest.json");
  EXPECT_NE(manifest.find("\"order\": \"3\""), std::string::npos) << manifest;
}

TEST_F(CliTest, EvalMtwvOnFiles) {
  std::ofstream(*dir_ / "refs.txt") << "duration 100\nkw1 10 1\nkw2 50 1\n";
  std::ofstream(*dir_ / "dets.txt") << "# kwid tbeg dur score\nkw1 10 1 0.9\nkw2 80 1 0.3\n";
  auto r = Swlm(*dir_, "eval-mtwv --refs refs.txt --dets dets.txt --label toy");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("toy\t0.5"), std::string::npos) << r.out;
}

}  // namespace
}  // namespace swlm
