#ifndef SWLM_MODEL_BUILDER_H_
#define SWLM_MODEL_BUILDER_H_

#include <limits>
#include <optional>
#include <vector>

#include "swlm/approximator.h"
#include "swlm/backoff_model.h"
#include "swlm/ngram_counts.h"

namespace swlm {

struct GrowConfig {
  int n_max = 3;
  // Minimum log-likelihood gain per stored n-gram for accepting a context.
  double epsilon = 0.1;
  // Weight S of a context's own scores against its back-off distribution.
  double smoothing = 0.5;
  // Kneser-Ney absolute discount; estimated per order when unset.
  std::optional<double> discount;
  // Stop accepting contexts once the model would exceed this many n-grams.
  std::optional<size_t> target_size;

  void Validate() const;
};

// One growing decision.
struct ContextDecision {
  Gram context;
  double gain = 0.0;
  double threshold = 0.0;
  bool accepted = false;
};

struct GrowReport {
  std::vector<ContextDecision> decisions;
  std::vector<double> discounts;  // KN only, indexed by order-1
  size_t Accepted(size_t history_length) const;
};

// Fixed-order models from score tables: every history in the table becomes
// a context. Explicit probabilities follow
//   p(w|h) = S * s(w|h) + (1-S) * p(w|h')
// bottom-up, with s the table's normalized score and the unigram level
// mixed with the uniform distribution.
BackoffModel BuildBackoffPc(const ScoreTable &table, const Vocabulary &vocab,
                            const GrowConfig &config);
BackoffModel BuildBackoffOurs(const ScoreTable &table, const Vocabulary &vocab,
                              const GrowConfig &config);

// Order-by-order growing from a top-K sum table accumulated at n_max. A
// context h of length L is a candidate when h minus its last token and h
// minus its first token were both accepted at length L-1; it is accepted
// when
//   sum_w weight(hw) * ln(p(w|h) / p(w|h')) > epsilon * |{w stored under h}|
// where p(w|h) is the probability the context would assign and p(w|h') the
// current back-off probability.
BackoffModel GrowApprox(const ScoreTable &table, const Vocabulary &vocab,
                        const GrowConfig &config, GrowReport *report = nullptr);
BackoffModel GrowApprox(RecordSource &stream, const Vocabulary &vocab,
                        const GrowConfig &config, GrowReport *report = nullptr);

// Variable-order interpolated Kneser-Ney using the same acceptance rule with
// counts as weights:
//   p(w|h) = max(c(hw)-D, 0)/c(h) + D*N1+(h.)/c(h) * p(w|h')
// and continuation counts at the unigram level.
BackoffModel GrowKn(const CountTrie &counts, const Vocabulary &vocab,
                    const GrowConfig &config, GrowReport *report = nullptr);

// Count-of-counts estimate n1/(n1+2 n2) per order, clamped to [0.05, 0.95].
std::vector<double> EstimateKnDiscounts(const CountTrie &counts, int n_max);

// Keeps the `target` highest-mass grams of `order` (ties by token ids),
// drops the descendants of removed grams and recomputes back-off weights.
BackoffModel PruneToSize(const BackoffModel &model, size_t target, int order);

}  // namespace swlm

#endif  // SWLM_MODEL_BUILDER_H_
