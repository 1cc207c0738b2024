#include "swlm/backoff_model.h"

#include <algorithm>
#include <fstream>
#include <map>

#include "swlm/error.h"
#include "swlm/log.h"
#include "swlm/util.h"

namespace swlm {

namespace {

constexpr uint32_t kModelVersion = 1;
constexpr double kDegenerate = 1e-12;

double SafeLog10(double p) {
  if (!(p > 0.0)) return kLog10Floor;
  return std::max(std::log10(p), kLog10Floor);
}

}  // namespace

BackoffModel::BackoffModel(Vocabulary vocab) : vocab_(std::move(vocab)) {}

NgramEntry &BackoffModel::Set(std::span<const TokenId> gram, double log10_prob,
                              double mass) {
  if (gram.empty()) throw UsageError("cannot store an empty gram");
  for (TokenId t : gram)
    if (!vocab_.Contains(t)) throw UsageError("gram token outside vocabulary");
  if (gram.size() > orders_.size()) orders_.resize(gram.size());
  NgramEntry &e = orders_[gram.size() - 1][Gram(gram.begin(), gram.end())];
  e.log10_prob = std::max(std::min(log10_prob, 0.0), kLog10Floor);
  e.mass = mass;
  return e;
}

const NgramEntry *BackoffModel::Find(std::span<const TokenId> gram) const {
  if (gram.empty() || gram.size() > orders_.size()) return nullptr;
  const auto &m = orders_[gram.size() - 1];
  auto it = m.find(Gram(gram.begin(), gram.end()));
  return it == m.end() ? nullptr : &it->second;
}

NgramEntry *BackoffModel::FindMutable(std::span<const TokenId> gram) {
  return const_cast<NgramEntry *>(std::as_const(*this).Find(gram));
}

bool BackoffModel::Erase(std::span<const TokenId> gram) {
  if (gram.empty() || gram.size() > orders_.size()) return false;
  return orders_[gram.size() - 1].erase(Gram(gram.begin(), gram.end())) > 0;
}

const BackoffModel::OrderMap &BackoffModel::Order(int order) const {
  static const OrderMap kEmpty;
  if (order < 1 || order > max_order()) return kEmpty;
  return orders_[static_cast<size_t>(order - 1)];
}

std::vector<const Gram *> BackoffModel::SortedGrams(int order) const {
  std::vector<const Gram *> out;
  for (const auto &[g, e] : Order(order)) out.push_back(&g);
  std::sort(out.begin(), out.end(),
            [](const Gram *a, const Gram *b) { return *a < *b; });
  return out;
}

size_t BackoffModel::NumNgrams(int order) const { return Order(order).size(); }

size_t BackoffModel::TotalNgrams() const {
  size_t n = 0;
  for (const auto &m : orders_) n += m.size();
  return n;
}

void BackoffModel::TrimOrders() {
  while (!orders_.empty() && orders_.back().empty()) orders_.pop_back();
}

double BackoffModel::Log10Prob(std::span<const TokenId> history,
                               TokenId w) const {
  if (orders_.empty()) return kLog10Floor;
  const size_t max_hist = std::min(history.size(), orders_.size() - 1);
  double bows = 0.0;
  Gram key;
  key.reserve(max_hist + 1);
  for (size_t len = max_hist;; --len) {
    auto h = history.subspan(history.size() - len, len);
    key.assign(h.begin(), h.end());
    key.push_back(w);
    const auto &m = orders_[len];
    if (auto it = m.find(key); it != m.end())
      return std::max(bows + it->second.log10_prob, kLog10Floor);
    if (len == 0) break;
    key.pop_back();
    const auto &ctx = orders_[len - 1];
    if (auto it = ctx.find(key); it != ctx.end() && it->second.has_bow)
      bows += it->second.log10_bow;
  }
  return kLog10Floor;
}

void BackoffModel::ComputeBackoffsAt(int order) {
  if (order < 1 || order > max_order()) return;
  auto &contexts = orders_[static_cast<size_t>(order - 1)];
  for (auto &[g, e] : contexts) {
    e.has_bow = false;
    e.log10_bow = 0.0;
  }
  if (order >= max_order()) return;

  // Children grouped by their context, visited in sorted order so any
  // diagnostics come out deterministically.
  std::map<Gram, std::vector<TokenId>> children;
  for (const auto &[g, e] : orders_[static_cast<size_t>(order)])
    children[Gram(g.begin(), g.end() - 1)].push_back(g.back());

  for (auto &[h, words] : children) {
    auto it = contexts.find(h);
    if (it == contexts.end())
      throw DataError("context '" + GramToString(vocab_, h) +
                      "' of a stored gram is missing (model not prefix-closed)");
    std::sort(words.begin(), words.end());
    std::vector<double> explicit_p, lower_p;
    Gram gram = h;
    gram.push_back(0);
    std::span<const TokenId> lower(h.data() + 1, h.size() - 1);
    for (TokenId w : words) {
      gram.back() = w;
      explicit_p.push_back(std::pow(10.0, Find(gram)->log10_prob));
      lower_p.push_back(std::pow(10.0, Log10Prob(lower, w)));
    }
    double numerator = 1.0 - PairwiseSum(explicit_p);
    double denominator = 1.0 - PairwiseSum(lower_p);
    NgramEntry &e = it->second;
    e.has_bow = true;
    if (denominator < kDegenerate) {
      if (numerator > 1e-6)
        Log(LogLevel::kWarn, "bow_degenerate",
            {{"context", GramToString(vocab_, h)},
             {"numerator", std::to_string(numerator)}});
      e.log10_bow = 0.0;
    } else {
      e.log10_bow = SafeLog10(numerator / denominator);
    }
  }
}

void BackoffModel::RecomputeBackoffs() {
  for (int k = 1; k <= max_order(); ++k) ComputeBackoffsAt(k);
}

void BackoffModel::CheckPrefixClosed() const {
  for (int k = 2; k <= max_order(); ++k) {
    for (const Gram *g : SortedGrams(k)) {
      if (!Find(std::span(*g).first(g->size() - 1)))
        throw DataError("gram '" + GramToString(vocab_, *g) +
                        "' has no stored prefix");
    }
  }
}

std::vector<Gram> BackoffModel::Contexts() const {
  std::vector<Gram> out{Gram{}};
  for (int k = 1; k <= max_order(); ++k)
    for (const Gram *g : SortedGrams(k))
      if (Order(k).at(*g).has_bow) out.push_back(*g);
  return out;
}

void BackoffModel::Save(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  bin::WriteHeader(out, "SWBM", kModelVersion);
  bin::WriteU64(out, vocab_.Hash());
  bin::WriteU64(out, vocab_.size());
  for (const auto &t : vocab_.tokens()) bin::WriteString(out, t);
  bin::WriteU32(out, static_cast<uint32_t>(max_order()));
  for (int k = 1; k <= max_order(); ++k) {
    auto grams = SortedGrams(k);
    bin::WriteU64(out, grams.size());
    for (const Gram *g : grams) {
      for (TokenId t : *g) bin::WriteVarint(out, t);
      const NgramEntry &e = Order(k).at(*g);
      bin::WriteF64(out, e.log10_prob);
      bin::WriteU8(out, e.has_bow ? 1 : 0);
      bin::WriteF64(out, e.log10_bow);
      bin::WriteF64(out, e.mass);
    }
  }
}

BackoffModel BackoffModel::Load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  bin::ExpectHeader(in, "SWBM", kModelVersion);
  uint64_t hash = bin::ReadU64(in);
  uint64_t n = bin::ReadU64(in);
  std::vector<std::string> tokens;
  for (uint64_t i = 0; i < n; ++i) tokens.push_back(bin::ReadString(in));
  Vocabulary vocab = Vocabulary::FromTokens(tokens);
  if (vocab.Hash() != hash || vocab.tokens() != tokens)
    throw DataError(path + ": vocabulary hash mismatch");
  BackoffModel model(std::move(vocab));
  uint32_t order = bin::ReadU32(in);
  for (uint32_t k = 1; k <= order; ++k) {
    uint64_t count = bin::ReadU64(in);
    for (uint64_t i = 0; i < count; ++i) {
      Gram g(k);
      for (auto &t : g) t = static_cast<TokenId>(bin::ReadVarint(in));
      double lp = bin::ReadF64(in);
      bool has_bow = bin::ReadU8(in) != 0;
      double bow = bin::ReadF64(in);
      double mass = bin::ReadF64(in);
      NgramEntry &e = model.Set(g, lp, mass);
      e.has_bow = has_bow;
      e.log10_bow = bow;
    }
  }
  model.CheckPrefixClosed();
  return model;
}

double Log10Likelihood(const BackoffModel &model, const Corpus &corpus) {
  double total = 0.0;
  Gram history;
  for (const auto &s : corpus) {
    history.assign(1, Vocabulary::kBos);
    for (size_t i = 0; i <= s.size(); ++i) {
      TokenId w = i < s.size() ? s[i] : Vocabulary::kEos;
      total += model.Log10Prob(history, w);
      history.push_back(w);
    }
  }
  return total;
}

double Perplexity(const BackoffModel &model, const Corpus &corpus) {
  size_t n = CountPredictions(corpus);
  if (corpus.empty() || n == 0) throw UsageError("perplexity of an empty corpus");
  return std::pow(10.0, -Log10Likelihood(model, corpus) / static_cast<double>(n));
}

double Perplexity(const BackoffModel &model, const TextCorpus &corpus) {
  return Perplexity(model, ToIds(corpus, model.vocab()));
}

NormalizationReport ValidateNormalization(const BackoffModel &model,
                                          size_t max_pairs) {
  auto contexts = model.Contexts();
  const size_t vsize = model.vocab().NumPredictable();
  if (contexts.size() * vsize > max_pairs)
    throw UsageError("normalization check needs " +
                     std::to_string(contexts.size() * vsize) +
                     " queries, above the limit of " + std::to_string(max_pairs));
  NormalizationReport report;
  std::vector<double> probs(vsize);
  for (const Gram &h : contexts) {
    for (size_t i = 0; i < vsize; ++i)
      probs[i] = model.Prob(h, Vocabulary::OutputToken(i));
    double dev = std::abs(PairwiseSum(probs) - 1.0);
    if (report.contexts_checked == 0 || dev > report.max_deviation) {
      report.max_deviation = dev;
      report.worst_context = h;
    }
    ++report.contexts_checked;
  }
  return report;
}

BackoffModel Interpolate(const BackoffModel &a, const BackoffModel &b,
                         const InterpolationSpec &spec) {
  if (!(spec.lambda >= 0.0 && spec.lambda <= 1.0))
    throw UsageError("interpolation weight must lie in [0,1]");
  if (!(a.vocab() == b.vocab()))
    throw DataError("cannot interpolate models over different vocabularies");
  const double lam = spec.lambda;
  BackoffModel out(a.vocab());

  auto mix = [&](std::span<const TokenId> h, TokenId w) {
    return lam * a.Prob(h, w) + (1.0 - lam) * b.Prob(h, w);
  };
  auto mix_mass = [&](std::span<const TokenId> g) {
    const NgramEntry *ea = a.Find(g);
    const NgramEntry *eb = b.Find(g);
    double ma = ea && !std::isnan(ea->mass) ? ea->mass : 0.0;
    double mb = eb && !std::isnan(eb->mass) ? eb->mass : 0.0;
    if ((!ea || std::isnan(ea->mass)) && (!eb || std::isnan(eb->mass)))
      return std::nan("");
    return lam * ma + (1.0 - lam) * mb;
  };
  auto store = [&](std::span<const TokenId> g) {
    if (out.Find(g)) return;
    if (g.size() == 1 && g[0] == Vocabulary::kBos) {
      out.Set(g, kLog10Floor);
      return;
    }
    out.Set(g, SafeLog10(mix(g.first(g.size() - 1), g.back())), mix_mass(g));
  };

  const int order = std::max(a.max_order(), b.max_order());
  for (int k = 1; k <= order; ++k) {
    for (const BackoffModel *m : {&a, &b})
      for (const Gram *g : m->SortedGrams(k)) store(*g);
  }

  if (spec.mode == InterpolationSpec::Mode::kExact) {
    std::vector<Gram> contexts;
    for (const BackoffModel *m : {&a, &b})
      for (auto &h : m->Contexts()) contexts.push_back(std::move(h));
    std::sort(contexts.begin(), contexts.end());
    contexts.erase(std::unique(contexts.begin(), contexts.end()), contexts.end());
    const size_t vsize = a.vocab().NumPredictable();
    if (contexts.size() * vsize > 50'000'000)
      throw UsageError("exact interpolation would store too many n-grams");
    for (const Gram &h : contexts) {
      Gram g = h;
      g.push_back(0);
      for (size_t i = 0; i < vsize; ++i) {
        g.back() = Vocabulary::OutputToken(i);
        store(g);
      }
    }
  }
  out.RecomputeBackoffs();
  return out;
}

}  // namespace swlm
