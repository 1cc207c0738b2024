#include "swlm/rnn.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "swlm/error.h"
#include "swlm/util.h"

namespace swlm {

namespace {

constexpr uint32_t kCheckpointVersion = 1;

// Uniform double in [0,1) from the top 53 bits; portable across standard
// libraries, unlike std::uniform_real_distribution.
double Uniform01(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void FillUniform(Eigen::Ref<Eigen::MatrixXd> m, std::mt19937_64 &rng,
                 double scale) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      m(r, c) = (2.0 * Uniform01(rng) - 1.0) * scale;
}

void Softmax(const Eigen::VectorXd &logits, Eigen::VectorXd &out) {
  double mx = logits.maxCoeff();
  out = (logits.array() - mx).exp();
  out /= out.sum();
}

void CheckInput(const RnnParams &p, TokenId token) {
  if (token >= p.input_size || token == Vocabulary::kEos)
    throw UsageError("token id " + std::to_string(token) +
                     " is not a valid network input");
}

void WriteMatrix(std::ostream &os, const Eigen::MatrixXd &m) {
  bin::WriteU64(os, static_cast<uint64_t>(m.rows()));
  bin::WriteU64(os, static_cast<uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) bin::WriteF64(os, m.data()[i]);
}

Eigen::MatrixXd ReadMatrix(std::istream &is) {
  auto rows = static_cast<Eigen::Index>(bin::ReadU64(is));
  auto cols = static_cast<Eigen::Index>(bin::ReadU64(is));
  if (rows < 0 || cols < 0 || rows * cols > (1LL << 32))
    throw DataError("bad matrix shape in checkpoint");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = bin::ReadF64(is);
  return m;
}

// Flat parameter addressing shared by RnnParams and RnnGradients:
// embedding, recurrent, recurrent bias, output, output bias (column-major).
template <typename M0, typename M1, typename M2, typename M3, typename M4>
double *FlatSlot(size_t index, M0 &e, M1 &w, M2 &b, M3 &u, M4 &c) {
  double *ptrs[] = {e.data(), w.data(), b.data(), u.data(), c.data()};
  const size_t sizes[] = {static_cast<size_t>(e.size()),
                          static_cast<size_t>(w.size()),
                          static_cast<size_t>(b.size()),
                          static_cast<size_t>(u.size()),
                          static_cast<size_t>(c.size())};
  for (int k = 0; k < 5; ++k) {
    if (index < sizes[k]) return ptrs[k] + index;
    index -= sizes[k];
  }
  throw UsageError("parameter index out of range");
}

}  // namespace

size_t RnnParams::NumParameters() const {
  return static_cast<size_t>(embedding.size() + recurrent.size() +
                             recurrent_bias.size() + output.size() +
                             output_bias.size());
}

double &RnnParams::Parameter(size_t index) {
  return *FlatSlot(index, embedding, recurrent, recurrent_bias, output,
                   output_bias);
}

double RnnParams::Parameter(size_t index) const {
  return const_cast<RnnParams *>(this)->Parameter(index);
}

bool RnnParams::AllFinite() const {
  return embedding.allFinite() && recurrent.allFinite() &&
         recurrent_bias.allFinite() && output.allFinite() &&
         output_bias.allFinite();
}

bool RnnParams::operator==(const RnnParams &o) const {
  auto same = [](const auto &a, const auto &b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
  };
  return input_size == o.input_size && output_size == o.output_size &&
         emb_dim == o.emb_dim && hidden_dim == o.hidden_dim && seed == o.seed &&
         vocab_hash == o.vocab_hash && same(embedding, o.embedding) &&
         same(recurrent, o.recurrent) && same(recurrent_bias, o.recurrent_bias) &&
         same(output, o.output) && same(output_bias, o.output_bias);
}

void RnnParams::Save(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  bin::WriteHeader(out, "SWRN", kCheckpointVersion);
  bin::WriteU64(out, vocab_hash);
  bin::WriteU64(out, seed);
  bin::WriteU64(out, input_size);
  bin::WriteU64(out, output_size);
  bin::WriteU64(out, emb_dim);
  bin::WriteU64(out, hidden_dim);
  WriteMatrix(out, embedding);
  WriteMatrix(out, recurrent);
  WriteMatrix(out, recurrent_bias);
  WriteMatrix(out, output);
  WriteMatrix(out, output_bias);
}

RnnParams RnnParams::Load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  bin::ExpectHeader(in, "SWRN", kCheckpointVersion);
  RnnParams p;
  p.vocab_hash = bin::ReadU64(in);
  p.seed = bin::ReadU64(in);
  p.input_size = bin::ReadU64(in);
  p.output_size = bin::ReadU64(in);
  p.emb_dim = bin::ReadU64(in);
  p.hidden_dim = bin::ReadU64(in);
  p.embedding = ReadMatrix(in);
  p.recurrent = ReadMatrix(in);
  p.recurrent_bias = ReadMatrix(in);
  p.output = ReadMatrix(in);
  p.output_bias = ReadMatrix(in);
  auto dims = [](const Eigen::MatrixXd &m, size_t r, size_t c) {
    return static_cast<size_t>(m.rows()) == r && static_cast<size_t>(m.cols()) == c;
  };
  if (!dims(p.embedding, p.input_size, p.emb_dim) ||
      !dims(p.recurrent, p.hidden_dim, p.emb_dim + p.hidden_dim) ||
      !dims(p.recurrent_bias, p.hidden_dim, 1) ||
      !dims(p.output, p.output_size, p.hidden_dim) ||
      !dims(p.output_bias, p.output_size, 1))
    throw DataError(path + ": checkpoint dimensions are inconsistent");
  if (!p.AllFinite()) throw DataError(path + ": non-finite parameters");
  return p;
}

RnnParams InitRnn(const Vocabulary &vocab, const RnnConfig &config) {
  if (config.emb_dim == 0 || config.hidden_dim == 0)
    throw UsageError("RNN dimensions must be positive");
  RnnParams p;
  p.input_size = vocab.size();
  p.output_size = vocab.NumPredictable();
  p.emb_dim = config.emb_dim;
  p.hidden_dim = config.hidden_dim;
  p.seed = config.seed;
  p.vocab_hash = vocab.Hash();
  const auto in = static_cast<Eigen::Index>(p.input_size);
  const auto out = static_cast<Eigen::Index>(p.output_size);
  const auto e = static_cast<Eigen::Index>(p.emb_dim);
  const auto h = static_cast<Eigen::Index>(p.hidden_dim);
  p.embedding.resize(in, e);
  p.recurrent.resize(h, e + h);
  p.recurrent_bias = Eigen::VectorXd::Zero(h);
  p.output.resize(out, h);
  p.output_bias = Eigen::VectorXd::Zero(out);
  std::mt19937_64 rng(config.seed);
  FillUniform(p.embedding, rng, config.init_scale);
  FillUniform(p.recurrent, rng, config.init_scale);
  FillUniform(p.output, rng, config.init_scale);
  return p;
}

RnnState InitialState(const RnnParams &params) {
  return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(params.hidden_dim))};
}

StepResult ScoreStep(const RnnParams &params, const RnnState &state,
                     TokenId token) {
  CheckInput(params, token);
  const auto e = static_cast<Eigen::Index>(params.emb_dim);
  const auto h = static_cast<Eigen::Index>(params.hidden_dim);
  Eigen::VectorXd x(e + h);
  x.head(e) = params.embedding.row(token).transpose();
  x.tail(h) = state.hidden;
  StepResult r;
  r.state.hidden = (params.recurrent * x + params.recurrent_bias).array().tanh();
  Softmax(params.output * r.state.hidden + params.output_bias, r.distribution);
  return r;
}

double CorpusLoss(const RnnParams &params, const Corpus &corpus) {
  double loss = 0.0;
  for (const auto &s : corpus) {
    RnnState state = InitialState(params);
    TokenId input = Vocabulary::kBos;
    for (size_t i = 0; i <= s.size(); ++i) {
      StepResult r = ScoreStep(params, state, input);
      TokenId target = i < s.size() ? s[i] : Vocabulary::kEos;
      loss -= std::log(r.distribution(
          static_cast<Eigen::Index>(Vocabulary::OutputIndex(target))));
      state = std::move(r.state);
      input = target;
    }
  }
  return loss;
}

double Perplexity(const RnnParams &params, const Corpus &corpus) {
  size_t n = CountPredictions(corpus);
  if (n == 0) throw UsageError("perplexity of an empty corpus");
  return std::exp(CorpusLoss(params, corpus) / static_cast<double>(n));
}

RnnGradients::RnnGradients(const RnnParams &p)
    : embedding(Eigen::MatrixXd::Zero(p.embedding.rows(), p.embedding.cols())),
      recurrent(Eigen::MatrixXd::Zero(p.recurrent.rows(), p.recurrent.cols())),
      recurrent_bias(Eigen::VectorXd::Zero(p.recurrent_bias.size())),
      output(Eigen::MatrixXd::Zero(p.output.rows(), p.output.cols())),
      output_bias(Eigen::VectorXd::Zero(p.output_bias.size())) {}

double RnnGradients::Norm() const {
  return std::sqrt(embedding.squaredNorm() + recurrent.squaredNorm() +
                   recurrent_bias.squaredNorm() + output.squaredNorm() +
                   output_bias.squaredNorm());
}

void RnnGradients::Scale(double factor) {
  embedding *= factor;
  recurrent *= factor;
  recurrent_bias *= factor;
  output *= factor;
  output_bias *= factor;
}

double RnnGradients::Flat(size_t index) const {
  auto &self = const_cast<RnnGradients &>(*this);
  return *FlatSlot(index, self.embedding, self.recurrent, self.recurrent_bias,
                   self.output, self.output_bias);
}

double AccumulateGradients(const RnnParams &params,
                           std::span<const TokenId> sentence,
                           RnnGradients &grads) {
  const auto e = static_cast<Eigen::Index>(params.emb_dim);
  const auto h = static_cast<Eigen::Index>(params.hidden_dim);
  const size_t steps = sentence.size() + 1;

  std::vector<TokenId> inputs(steps), targets(steps);
  std::vector<Eigen::VectorXd> xs(steps), hs(steps), ps(steps);
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(h);
  double loss = 0.0;
  for (size_t t = 0; t < steps; ++t) {
    inputs[t] = t == 0 ? Vocabulary::kBos : sentence[t - 1];
    targets[t] = t < sentence.size() ? sentence[t] : Vocabulary::kEos;
    CheckInput(params, inputs[t]);
    xs[t].resize(e + h);
    xs[t].head(e) = params.embedding.row(inputs[t]).transpose();
    xs[t].tail(h) = prev;
    hs[t] = (params.recurrent * xs[t] + params.recurrent_bias).array().tanh();
    Softmax(params.output * hs[t] + params.output_bias, ps[t]);
    loss -= std::log(
        ps[t](static_cast<Eigen::Index>(Vocabulary::OutputIndex(targets[t]))));
    prev = hs[t];
  }

  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(h);
  for (size_t t = steps; t-- > 0;) {
    Eigen::VectorXd dz = ps[t];
    dz(static_cast<Eigen::Index>(Vocabulary::OutputIndex(targets[t]))) -= 1.0;
    grads.output.noalias() += dz * hs[t].transpose();
    grads.output_bias += dz;
    Eigen::VectorXd dh = params.output.transpose() * dz + dh_next;
    Eigen::VectorXd da = dh.array() * (1.0 - hs[t].array().square());
    grads.recurrent.noalias() += da * xs[t].transpose();
    grads.recurrent_bias += da;
    Eigen::VectorXd dx = params.recurrent.transpose() * da;
    grads.embedding.row(inputs[t]) += dx.head(e).transpose();
    dh_next = dx.tail(h);
  }
  return loss;
}

namespace {

void ApplyUpdate(RnnParams &p, const RnnGradients &g, double lr) {
  p.embedding -= lr * g.embedding;
  p.recurrent -= lr * g.recurrent;
  p.recurrent_bias -= lr * g.recurrent_bias;
  p.output -= lr * g.output;
  p.output_bias -= lr * g.output_bias;
}

}  // namespace

TrainResult TrainRnn(const Corpus &corpus, const Vocabulary &vocab,
                     const RnnConfig &config, const Corpus *validation) {
  if (corpus.empty()) throw UsageError("cannot train on an empty corpus");
  if (config.epochs < 0) throw UsageError("epochs must be >= 0");
  if (config.learning_rate < 0) throw UsageError("learning rate must be >= 0");

  TrainResult result;
  RnnParams params = InitRnn(vocab, config);
  const Corpus &monitor = validation ? *validation : corpus;
  double best = CorpusLoss(params, monitor);
  result.initial_loss = best;
  result.params = params;
  if (config.learning_rate == 0.0) {
    result.epoch_losses.assign(static_cast<size_t>(config.epochs), best);
    return result;
  }

  std::mt19937_64 rng(config.seed ^ 0x5eedULL);
  std::vector<size_t> order(corpus.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  double lr = config.learning_rate;
  double previous = best;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng() % i]);
    for (size_t idx : order) {
      RnnGradients grads(params);
      double loss = AccumulateGradients(params, corpus[idx], grads);
      if (!std::isfinite(loss))
        throw NumericalError("training diverged: non-finite loss in epoch " +
                             std::to_string(epoch));
      double norm = grads.Norm();
      if (norm > config.clip_norm) grads.Scale(config.clip_norm / norm);
      ApplyUpdate(params, grads, lr);
    }
    double loss = CorpusLoss(params, monitor);
    if (!std::isfinite(loss) || !params.AllFinite())
      throw NumericalError("training diverged after epoch " +
                           std::to_string(epoch));
    result.epoch_losses.push_back(loss);
    if (loss < best) {
      best = loss;
      result.best_epoch = epoch;
      result.params = params;
    }
    if (config.halve_on_increase && loss > previous) lr *= 0.5;
    previous = loss;
  }
  return result;
}

double GradientCheck(const RnnParams &params, const Corpus &batch,
                     double epsilon, size_t max_checked) {
  RnnGradients grads(params);
  for (const auto &s : batch) AccumulateGradients(params, s, grads);

  const size_t total = params.NumParameters();
  std::vector<size_t> probe;
  if (total <= max_checked) {
    for (size_t i = 0; i < total; ++i) probe.push_back(i);
  } else {
    std::mt19937_64 rng(params.seed + 17);
    for (size_t i = 0; i < max_checked; ++i) probe.push_back(rng() % total);
  }

  RnnParams work = params;
  double worst = 0.0;
  for (size_t i : probe) {
    double &x = work.Parameter(i);
    const double saved = x;
    x = saved + epsilon;
    double up = CorpusLoss(work, batch);
    x = saved - epsilon;
    double down = CorpusLoss(work, batch);
    x = saved;
    double numeric = (up - down) / (2.0 * epsilon);
    double analytic = grads.Flat(i);
    double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  }
  return worst;
}

void RnnScorer::ScoreSentence(std::span<const TokenId> sentence,
                              const DistributionVisitor &visit) const {
  RnnState state = InitialState(params_);
  TokenId input = Vocabulary::kBos;
  for (size_t i = 0; i <= sentence.size(); ++i) {
    StepResult r = ScoreStep(params_, state, input);
    visit(std::span<const double>(r.distribution.data(),
                                  static_cast<size_t>(r.distribution.size())));
    state = std::move(r.state);
    if (i < sentence.size()) input = sentence[i];
  }
}

}  // namespace swlm
