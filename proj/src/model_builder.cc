#include "swlm/model_builder.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "swlm/error.h"
#include "swlm/log.h"
#include "swlm/util.h"

namespace swlm {

namespace {

struct Candidate {
  TokenId w;
  double weight;  // accumulated mass or count behind the gram
  double p;       // explicit probability the context would store
  double lower;   // current back-off probability p(w|h')
};

// What the growing loop needs from a statistics table.
class GrowSource {
 public:
  virtual ~GrowSource() = default;
  virtual int order() const = 0;
  virtual std::vector<const Gram *> Histories(size_t len) const = 0;
  // Unigram distribution over the predictable vocabulary (p > 0).
  virtual std::vector<Candidate> Unigrams() const = 0;
  // Empty when h cannot become a context.
  virtual std::vector<Candidate> Explicit(const Gram &h,
                                          const BackoffModel &model) const = 0;
};

std::span<const TokenId> Lower(const Gram &h) {
  return std::span<const TokenId>(h).subspan(1);
}

class ScoreSource : public GrowSource {
 public:
  ScoreSource(const ScoreTable &table, const Vocabulary &vocab, double s)
      : table_(table), vocab_(vocab), s_(s) {}

  int order() const override { return table_.order; }

  std::vector<const Gram *> Histories(size_t len) const override {
    return table_.acc.table().SortedHistories(len);
  }

  std::vector<Candidate> Unigrams() const override {
    auto scores = table_.NormalizedScores(Gram{});
    if (!scores) throw DataError("score table has no unigram statistics");
    double total = 0.0;
    for (const auto &[w, y] : *scores) total += y;
    if (!(total > 0.0)) throw DataError("score table has zero unigram mass");
    const auto *ctx = table_.acc.table().Find(Gram{});
    const double uniform = 1.0 / static_cast<double>(vocab_.NumPredictable());
    std::vector<Candidate> out;
    size_t next = 0;
    for (TokenId w = 0; w < vocab_.size(); ++w) {
      if (w == Vocabulary::kBos) continue;
      double y = 0.0;
      while (next < scores->size() && (*scores)[next].first < w) ++next;
      if (next < scores->size() && (*scores)[next].first == w)
        y = (*scores)[next].second / total;
      const MassCell *cell = ctx->Find(w);
      out.push_back({w, cell ? cell->sum : 0.0, s_ * y + (1.0 - s_) * uniform,
                     uniform});
    }
    return out;
  }

  std::vector<Candidate> Explicit(const Gram &h,
                                  const BackoffModel &model) const override {
    std::vector<Candidate> out;
    auto scores = table_.NormalizedScores(h);
    if (!scores) {
      Log(LogLevel::kWarn, "context_zero_mass",
          {{"context", GramToString(vocab_, h)}});
      return out;
    }
    const auto *ctx = table_.acc.table().Find(h);
    for (const auto &[w, y] : *scores) {
      double lower = model.Prob(Lower(h), w);
      out.push_back({w, ctx->Find(w)->sum, s_ * y + (1.0 - s_) * lower, lower});
    }
    return out;
  }

 private:
  const ScoreTable &table_;
  const Vocabulary &vocab_;
  double s_;
};

// Continuation counts N1+(.w): distinct tokens seen before w.
std::map<TokenId, uint64_t> ContinuationCounts(const CountTrie &counts) {
  std::map<TokenId, uint64_t> out;
  if (counts.max_order() < 2) {
    for (const auto &[w, c] : counts.table().Find(Gram{})->entries())
      if (c > 0) out[w] = c;
    return out;
  }
  for (const auto &[h, ctx] : counts.table().Histories(1))
    for (const auto &[w, c] : ctx.entries())
      if (c > 0) ++out[w];
  return out;
}

class KnSource : public GrowSource {
 public:
  KnSource(const CountTrie &counts, const Vocabulary &vocab,
           std::vector<double> discounts)
      : counts_(counts), vocab_(vocab), d_(std::move(discounts)) {}

  int order() const override { return static_cast<int>(d_.size()); }

  std::vector<const Gram *> Histories(size_t len) const override {
    return counts_.table().SortedHistories(len);
  }

  std::vector<Candidate> Unigrams() const override {
    if (!counts_.table().Find(Gram{}))
      throw DataError("count table has no unigram statistics");
    auto cont = ContinuationCounts(counts_);
    double total = 0.0;
    for (const auto &[w, n] : cont) total += static_cast<double>(n);
    if (!(total > 0.0)) throw DataError("count table is empty");
    const double d = d_[0];
    const double types = static_cast<double>(cont.size());
    const double uniform = 1.0 / static_cast<double>(vocab_.NumPredictable());
    std::vector<Candidate> out;
    for (TokenId w = 0; w < vocab_.size(); ++w) {
      if (w == Vocabulary::kBos) continue;
      auto it = cont.find(w);
      double n = it == cont.end() ? 0.0 : static_cast<double>(it->second);
      double p = std::max(n - d, 0.0) / total + d * types / total * uniform;
      out.push_back({w, static_cast<double>(counts_.Count(Gram{w})), p, uniform});
    }
    return out;
  }

  std::vector<Candidate> Explicit(const Gram &h,
                                  const BackoffModel &model) const override {
    std::vector<Candidate> out;
    const auto *ctx = counts_.table().Find(h);
    if (!ctx || ctx->count == 0) return out;
    const double d = d_[h.size()];
    const double ch = static_cast<double>(ctx->count);
    auto entries = ctx->Sorted();
    double types = 0.0;
    for (const auto &[w, c] : entries)
      if (c > 0) types += 1.0;
    const double gamma = d * types / ch;
    for (const auto &[w, c] : entries) {
      if (c == 0) continue;
      double lower = model.Prob(Lower(h), w);
      double p = std::max(static_cast<double>(c) - d, 0.0) / ch + gamma * lower;
      out.push_back({w, static_cast<double>(c), p, lower});
    }
    return out;
  }

 private:
  const CountTrie &counts_;
  const Vocabulary &vocab_;
  std::vector<double> d_;
};

double Gain(const std::vector<Candidate> &entries) {
  double g = 0.0;
  for (const auto &e : entries)
    if (e.weight > 0.0) g += e.weight * std::log(e.p / e.lower);
  return g;
}

BackoffModel Grow(const GrowSource &src, const Vocabulary &vocab, int n_max,
                  bool grow, double epsilon, std::optional<size_t> target,
                  GrowReport *report) {
  BackoffModel model(vocab);
  model.Set(Gram{Vocabulary::kBos}, kLog10Floor);
  for (const auto &u : src.Unigrams())
    model.Set(Gram{u.w}, std::log10(u.p), u.weight);

  const int top = std::min(n_max, src.order());
  std::set<Gram> prev{Gram{}};
  for (int len = 1; len < top; ++len) {
    std::set<Gram> next;
    std::vector<std::pair<const Gram *, std::vector<Candidate>>> pending;
    size_t pending_size = 0;
    for (const Gram *h : src.Histories(static_cast<size_t>(len))) {
      Gram head(h->begin(), h->end() - 1);
      Gram tail(h->begin() + 1, h->end());
      if (!prev.count(head) || !prev.count(tail)) continue;
      if (!model.Find(*h)) continue;
      auto entries = src.Explicit(*h, model);
      if (entries.empty()) continue;
      ContextDecision d;
      d.context = *h;
      d.gain = Gain(entries);
      d.threshold = epsilon * static_cast<double>(entries.size());
      d.accepted = !grow || d.gain > d.threshold;
      if (d.accepted && target &&
          model.TotalNgrams() + pending_size + entries.size() > *target) {
        d.accepted = false;
        Log(LogLevel::kDebug, "context_over_budget",
            {{"context", GramToString(vocab, *h)}});
      }
      if (d.accepted) {
        next.insert(*h);
        pending_size += entries.size();
        pending.emplace_back(h, std::move(entries));
      }
      if (report) report->decisions.push_back(std::move(d));
    }
    Gram gram;
    for (const auto &[h, entries] : pending) {
      gram = *h;
      gram.push_back(0);
      for (const auto &e : entries) {
        gram.back() = e.w;
        model.Set(gram, std::log10(e.p), e.weight);
      }
    }
    model.ComputeBackoffsAt(len);
    if (next.empty()) break;
    prev = std::move(next);
  }
  model.TrimOrders();
  return model;
}

void CheckTable(const ScoreTable &table, const Vocabulary &vocab) {
  if (table.vocab_hash() != vocab.Hash())
    throw DataError("score table was built over a different vocabulary");
}

double ClampDiscount(double d) { return std::clamp(d, 0.05, 0.95); }

}  // namespace

void GrowConfig::Validate() const {
  if (n_max < 1) throw UsageError("n_max must be >= 1");
  if (std::isnan(epsilon) || epsilon < 0.0)
    throw UsageError("epsilon must be >= 0");
  if (!(smoothing > 0.0 && smoothing < 1.0))
    throw UsageError("smoothing S must lie in (0, 1)");
  if (discount && !(*discount > 0.0 && *discount < 1.0))
    throw UsageError("discount D must lie in (0, 1)");
  if (target_size && *target_size == 0)
    throw UsageError("target size must be positive");
}

size_t GrowReport::Accepted(size_t history_length) const {
  size_t n = 0;
  for (const auto &d : decisions)
    if (d.accepted && d.context.size() == history_length) ++n;
  return n;
}

BackoffModel BuildBackoffPc(const ScoreTable &table, const Vocabulary &vocab,
                            const GrowConfig &config) {
  config.Validate();
  CheckTable(table, vocab);
  if (table.method != ScoreMethod::kPc)
    throw UsageError("expected a probability-conversion score table");
  ScoreSource src(table, vocab, config.smoothing);
  return Grow(src, vocab, table.order, false, 0.0, std::nullopt, nullptr);
}

BackoffModel BuildBackoffOurs(const ScoreTable &table, const Vocabulary &vocab,
                              const GrowConfig &config) {
  config.Validate();
  CheckTable(table, vocab);
  if (table.method != ScoreMethod::kOurs)
    throw UsageError("expected a top-K sum score table");
  ScoreSource src(table, vocab, config.smoothing);
  return Grow(src, vocab, table.order, false, 0.0, std::nullopt, nullptr);
}

BackoffModel GrowApprox(const ScoreTable &table, const Vocabulary &vocab,
                        const GrowConfig &config, GrowReport *report) {
  config.Validate();
  CheckTable(table, vocab);
  if (table.order < config.n_max)
    throw UsageError("score table order " + std::to_string(table.order) +
                     " is below n_max " + std::to_string(config.n_max));
  ScoreSource src(table, vocab, config.smoothing);
  return Grow(src, vocab, config.n_max, true, config.epsilon,
              config.target_size, report);
}

BackoffModel GrowApprox(RecordSource &stream, const Vocabulary &vocab,
                        const GrowConfig &config, GrowReport *report) {
  config.Validate();
  ScoreTable table = OursScores(stream, config.n_max);
  return GrowApprox(table, vocab, config, report);
}

std::vector<double> EstimateKnDiscounts(const CountTrie &counts, int n_max) {
  if (n_max < 1 || n_max > counts.max_order())
    throw UsageError("discount order outside the count table");
  std::vector<double> out;
  for (int k = 1; k <= n_max; ++k) {
    uint64_t n1 = 0, n2 = 0;
    auto tally = [&](uint64_t c) {
      if (c == 1) ++n1;
      if (c == 2) ++n2;
    };
    if (k == 1) {
      for (const auto &[w, n] : ContinuationCounts(counts)) tally(n);
    } else {
      for (const auto &[h, ctx] : counts.table().Histories(k - 1))
        for (const auto &[w, c] : ctx.entries()) tally(c);
    }
    double d = n1 + 2 * n2 == 0
                   ? 0.5
                   : static_cast<double>(n1) / static_cast<double>(n1 + 2 * n2);
    out.push_back(ClampDiscount(d));
  }
  return out;
}

BackoffModel GrowKn(const CountTrie &counts, const Vocabulary &vocab,
                    const GrowConfig &config, GrowReport *report) {
  config.Validate();
  if (counts.vocab_hash() != vocab.Hash())
    throw DataError("counts were built over a different vocabulary");
  if (counts.max_order() < config.n_max)
    throw UsageError("count table order " + std::to_string(counts.max_order()) +
                     " is below n_max " + std::to_string(config.n_max));
  std::vector<double> d =
      config.discount ? std::vector<double>(static_cast<size_t>(config.n_max),
                                            *config.discount)
                      : EstimateKnDiscounts(counts, config.n_max);
  if (report) report->discounts = d;
  KnSource src(counts, vocab, d);
  return Grow(src, vocab, config.n_max, true, config.epsilon,
              config.target_size, report);
}

BackoffModel PruneToSize(const BackoffModel &model, size_t target, int order) {
  if (order < 1 || order > model.max_order())
    throw UsageError("prune order " + std::to_string(order) +
                     " outside model order " + std::to_string(model.max_order()));
  auto grams = model.SortedGrams(order);
  if (grams.size() <= target) return model;
  if (order == 1)
    throw UsageError("unigrams cannot be pruned; every word needs a unigram");

  bool all_mass = true;
  for (const Gram *g : grams)
    if (std::isnan(model.Find(*g)->mass)) all_mass = false;
  std::vector<std::pair<double, const Gram *>> ranked;
  for (const Gram *g : grams) {
    double key;
    if (all_mass) {
      key = model.Find(*g)->mass;
    } else {
      // log10 of the chained joint probability of the gram
      key = 0.0;
      std::span<const TokenId> s(*g);
      for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == Vocabulary::kBos) continue;
        key += model.Log10Prob(s.first(i), s[i]);
      }
    }
    ranked.emplace_back(key, g);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto &a, const auto &b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  });

  BackoffModel out = model;
  for (size_t i = target; i < ranked.size(); ++i) out.Erase(*ranked[i].second);
  for (int k = order + 1; k <= out.max_order(); ++k) {
    std::vector<Gram> orphans;
    for (const Gram *g : out.SortedGrams(k))
      if (!out.Find(std::span<const TokenId>(*g).first(g->size() - 1)))
        orphans.push_back(*g);
    for (const auto &g : orphans) out.Erase(g);
  }
  out.TrimOrders();
  out.RecomputeBackoffs();
  return out;
}

}  // namespace swlm
