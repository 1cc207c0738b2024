#include <gtest/gtest.h>

#include <cmath>

#include "swlm/rnn.h"
#include "test_support.h"

namespace swlm {
namespace {

const char *kToy[] = {"a b c", "b c a b", "c a b", "a b", "b c c a"};

struct Toy {
  Vocabulary vocab;
  Corpus corpus;
  Toy() {
    TextCorpus t;
    for (const char *s : kToy) t.push_back(testing::Words(s));
    vocab = Vocabulary::FromCorpus(t);
    corpus = ToIds(t, vocab);
  }
};

TEST(Rnn, DistributionIsNormalizedAndPositive) {
  Toy toy;
  RnnConfig cfg;
  cfg.init_scale = 2.0;
  auto p = InitRnn(toy.vocab, cfg);
  RnnState s = InitialState(p);
  for (TokenId t : {Vocabulary::kBos, TokenId{3}, TokenId{4}, TokenId{5}}) {
    auto r = ScoreStep(p, s, t);
    EXPECT_NEAR(r.distribution.sum(), 1.0, 1e-6);
    EXPECT_GT(r.distribution.minCoeff(), 0.0);
    s = r.state;
  }
}

TEST(Rnn, ZeroOutputWeightsGiveUniform) {
  Toy toy;
  auto p = InitRnn(toy.vocab, {});
  p.output.setZero();
  p.output_bias.setZero();
  auto r = ScoreStep(p, InitialState(p), Vocabulary::kBos);
  for (Eigen::Index i = 0; i < r.distribution.size(); ++i)
    EXPECT_NEAR(r.distribution(i), 1.0 / toy.vocab.NumPredictable(), 1e-15);
}

TEST(Rnn, HandComputedForwardPass) {
  // Reserved tokens only: inputs <s>, </s>, <unk>; outputs </s>, <unk>.
  Vocabulary v;
  RnnConfig cfg;
  cfg.emb_dim = 1;
  cfg.hidden_dim = 1;
  auto p = InitRnn(v, cfg);
  p.embedding << 0.5, 0.0, -0.25;
  p.recurrent << 1.0, 0.5;
  p.recurrent_bias << 0.1;
  p.output << 2.0, -1.0;
  p.output_bias << 0.0, 0.5;

  auto r1 = ScoreStep(p, InitialState(p), Vocabulary::kBos);
  double h1 = std::tanh(1.0 * 0.5 + 0.5 * 0.0 + 0.1);
  double l0 = 2.0 * h1, l1 = -h1 + 0.5;
  double p0 = std::exp(l0) / (std::exp(l0) + std::exp(l1));
  EXPECT_NEAR(r1.state.hidden(0), h1, 1e-15);
  EXPECT_NEAR(r1.distribution(0), p0, 1e-12);
  EXPECT_NEAR(r1.distribution(1), 1.0 - p0, 1e-12);

  auto r2 = ScoreStep(p, r1.state, Vocabulary::kUnk);
  double h2 = std::tanh(1.0 * -0.25 + 0.5 * h1 + 0.1);
  l0 = 2.0 * h2;
  l1 = -h2 + 0.5;
  p0 = std::exp(l0) / (std::exp(l0) + std::exp(l1));
  EXPECT_NEAR(r2.distribution(0), p0, 1e-12);
}

TEST(Rnn, RejectsBadInput) {
  Toy toy;
  auto p = InitRnn(toy.vocab, {});
  EXPECT_THROW(ScoreStep(p, InitialState(p), 99), UsageError);
  EXPECT_THROW(ScoreStep(p, InitialState(p), Vocabulary::kEos), UsageError);
}

TEST(Rnn, GradientCheck) {
  Toy toy;
  RnnConfig cfg;  // 8 / 16
  cfg.init_scale = 0.5;
  auto p = InitRnn(toy.vocab, cfg);
  double err = GradientCheck(p, toy.corpus, 1e-5);
  EXPECT_LT(err, 1e-4);
  double coarse = GradientCheck(p, toy.corpus, 1e-2);
  EXPECT_GT(coarse, err);
}

TEST(Rnn, GradientCheckSingleToken) {
  Toy toy;
  auto p = InitRnn(toy.vocab, {});
  Corpus one = {{3}};
  double err = GradientCheck(p, one, 1e-5);
  EXPECT_TRUE(std::isfinite(err));
  EXPECT_LT(err, 1e-4);
}

TEST(Rnn, TrainingIsDeterministic) {
  Toy toy;
  RnnConfig cfg;
  cfg.epochs = 5;
  auto a = TrainRnn(toy.corpus, toy.vocab, cfg);
  auto b = TrainRnn(toy.corpus, toy.vocab, cfg);
  EXPECT_TRUE(a.params == b.params);
  cfg.seed = 2;
  auto c = TrainRnn(toy.corpus, toy.vocab, cfg);
  EXPECT_FALSE(a.params == c.params);
}

TEST(Rnn, ZeroLearningRateKeepsInit) {
  Toy toy;
  RnnConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 3;
  auto r = TrainRnn(toy.corpus, toy.vocab, cfg);
  EXPECT_TRUE(r.params == InitRnn(toy.vocab, cfg));
}

TEST(Rnn, LearnsBelowUniformPerplexity) {
  Toy toy;
  RnnConfig cfg;
  cfg.epochs = 50;
  auto r = TrainRnn(toy.corpus, toy.vocab, cfg);
  double ppl = Perplexity(r.params, toy.corpus);
  EXPECT_LT(ppl, static_cast<double>(toy.vocab.NumPredictable()));
  EXPECT_LT(r.epoch_losses[static_cast<size_t>(r.best_epoch) - 1], r.initial_loss);
}

TEST(Rnn, SnapshotRoundTrip) {
  Toy toy;
  auto p = InitRnn(toy.vocab, {});
  auto dir = testing::TempDir("rnn");
  p.Save((dir / "p.bin").string());
  auto q = RnnParams::Load((dir / "p.bin").string());
  EXPECT_TRUE(p == q);
  EXPECT_EQ(q.seed, p.seed);
}

}  // namespace
}  // namespace swlm
