#ifndef SWLM_RNN_H_
#define SWLM_RNN_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "swlm/corpus_io.h"
#include "swlm/scorer_stream.h"
#include "swlm/vocabulary.h"

namespace swlm {

// Single-layer Elman network with tanh hidden units and a full softmax over
// the predictable vocabulary:
//   h_t = tanh(W [E x_t ; h_{t-1}] + b),  p_t = softmax(U h_t + c).
struct RnnParams {
  size_t input_size = 0;   // vocabulary size, <s> included
  size_t output_size = 0;  // predictable tokens
  size_t emb_dim = 0;
  size_t hidden_dim = 0;
  uint64_t seed = 0;
  uint64_t vocab_hash = 0;

  Eigen::MatrixXd embedding;      // input_size x emb_dim
  Eigen::MatrixXd recurrent;      // hidden_dim x (emb_dim + hidden_dim)
  Eigen::VectorXd recurrent_bias; // hidden_dim
  Eigen::MatrixXd output;         // output_size x hidden_dim
  Eigen::VectorXd output_bias;    // output_size

  size_t NumParameters() const;
  // Flat view over all parameters in a fixed order; used by the gradient
  // check and for bitwise comparisons.
  double &Parameter(size_t index);
  double Parameter(size_t index) const;
  bool AllFinite() const;

  bool operator==(const RnnParams &o) const;

  void Save(const std::string &path) const;
  static RnnParams Load(const std::string &path);
};

struct RnnConfig {
  size_t emb_dim = 8;
  size_t hidden_dim = 16;
  int epochs = 10;
  double learning_rate = 0.1;
  uint64_t seed = 1;
  double clip_norm = 5.0;
  double init_scale = 0.1;
  // Halve the learning rate whenever the monitored loss goes up.
  bool halve_on_increase = true;
};

RnnParams InitRnn(const Vocabulary &vocab, const RnnConfig &config);

struct RnnState {
  Eigen::VectorXd hidden;
};

RnnState InitialState(const RnnParams &params);

struct StepResult {
  RnnState state;
  Eigen::VectorXd distribution;  // indexed by Vocabulary::OutputIndex
};

// Feeds `token` and returns the next-token distribution. Throws UsageError
// for an id outside the input vocabulary.
StepResult ScoreStep(const RnnParams &params, const RnnState &state,
                     TokenId token);

// Sum of -ln p over every predicted token (</s> included).
double CorpusLoss(const RnnParams &params, const Corpus &corpus);
double Perplexity(const RnnParams &params, const Corpus &corpus);

struct RnnGradients {
  Eigen::MatrixXd embedding;
  Eigen::MatrixXd recurrent;
  Eigen::VectorXd recurrent_bias;
  Eigen::MatrixXd output;
  Eigen::VectorXd output_bias;

  explicit RnnGradients(const RnnParams &p);
  double Norm() const;
  void Scale(double factor);
  double Flat(size_t index) const;
};

// Backpropagation through time over whole sentences; returns the loss and
// accumulates gradients of the summed loss into `grads`.
double AccumulateGradients(const RnnParams &params,
                           std::span<const TokenId> sentence,
                           RnnGradients &grads);

struct TrainResult {
  RnnParams params;
  std::vector<double> epoch_losses;  // monitored loss after each epoch
  int best_epoch = 0;                // 0 means the initialization
  double initial_loss = 0.0;
};

// Plain SGD, one sentence per update, gradient-norm clipping, best-epoch
// selection on `validation` when given (training loss otherwise).
// Deterministic for a given seed. Throws NumericalError on divergence.
TrainResult TrainRnn(const Corpus &corpus, const Vocabulary &vocab,
                     const RnnConfig &config,
                     const Corpus *validation = nullptr);

// Max relative error between analytic and central-difference gradients of
// the batch loss over the parameters. `max_checked` bounds how many
// parameters are probed; a seeded subset is used when there are more.
double GradientCheck(const RnnParams &params, const Corpus &batch,
                     double epsilon, size_t max_checked = 4096);

class RnnScorer : public SequenceScorer {
 public:
  explicit RnnScorer(const RnnParams &params) : params_(params) {}
  size_t OutputSize() const override { return params_.output_size; }
  uint64_t VocabHash() const override { return params_.vocab_hash; }
  void ScoreSentence(std::span<const TokenId> sentence,
                     const DistributionVisitor &visit) const override;

 private:
  const RnnParams &params_;
};

}  // namespace swlm

#endif  // SWLM_RNN_H_
