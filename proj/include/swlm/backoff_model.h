#ifndef SWLM_BACKOFF_MODEL_H_
#define SWLM_BACKOFF_MODEL_H_

#include <cmath>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "swlm/corpus_io.h"
#include "swlm/vocabulary.h"

namespace swlm {

// log10 floor for probabilities and padding entries such as <s>.
inline constexpr double kLog10Floor = -99.0;

struct NgramEntry {
  double log10_prob = 0.0;
  double log10_bow = 0.0;
  bool has_bow = false;  // set only for grams that are contexts of longer ones
  // Accumulated score or count behind the entry; NaN when unknown (for
  // instance after reading ARPA). Used to rank entries when pruning.
  double mass = std::nan("");
};

// A back-off n-gram model with ARPA semantics:
//   p(w|h) = P(hw)                 if hw is stored
//          = bow(h) * p(w|h')      otherwise, with h' = h minus its oldest token
// bow(h) is 1 when h is not a stored context.
class BackoffModel {
 public:
  explicit BackoffModel(Vocabulary vocab);

  const Vocabulary &vocab() const { return vocab_; }
  int max_order() const { return static_cast<int>(orders_.size()); }

  using OrderMap = std::unordered_map<Gram, NgramEntry, GramHash>;

  // Creates the entry when missing, growing max_order as needed.
  NgramEntry &Set(std::span<const TokenId> gram, double log10_prob,
                  double mass = std::nan(""));
  const NgramEntry *Find(std::span<const TokenId> gram) const;
  NgramEntry *FindMutable(std::span<const TokenId> gram);
  bool Erase(std::span<const TokenId> gram);

  // Grams of one order (1-based).
  const OrderMap &Order(int order) const;
  std::vector<const Gram *> SortedGrams(int order) const;
  size_t NumNgrams(int order) const;
  size_t TotalNgrams() const;
  // Drops empty top orders.
  void TrimOrders();

  // log10 p(w|history). `history` may be longer than max_order-1; only its
  // most recent tokens are used.
  double Log10Prob(std::span<const TokenId> history, TokenId w) const;
  double Prob(std::span<const TokenId> history, TokenId w) const {
    return std::pow(10.0, Log10Prob(history, w));
  }

  // Recomputes every back-off weight from the explicit probabilities:
  //   bow(h) = (1 - sum_{w in S(h)} p(w|h)) / (1 - sum_{w in S(h)} p(w|h'))
  // where S(h) are the words stored under h. Explicit probabilities are
  // left alone; weights are rebuilt bottom-up.
  void RecomputeBackoffs();
  // Recomputes only the weights of contexts with the given length (grams
  // of that order whose extensions are stored). Lower orders must be final.
  void ComputeBackoffsAt(int order);

  // Throws DataError naming the first gram whose proper prefix is missing.
  void CheckPrefixClosed() const;
  // Histories with descendants: the empty history plus every gram with a
  // back-off weight, sorted by order then token ids.
  std::vector<Gram> Contexts() const;

  // Binary snapshot: "SWBM" header, vocabulary, order, sorted entries.
  void Save(const std::string &path) const;
  static BackoffModel Load(const std::string &path);

 private:
  Vocabulary vocab_;
  std::vector<OrderMap> orders_;
};

// Perplexity 10^(-mean log10 p) over every predicted token including </s>.
double Perplexity(const BackoffModel &model, const Corpus &corpus);
double Perplexity(const BackoffModel &model, const TextCorpus &corpus);
double Log10Likelihood(const BackoffModel &model, const Corpus &corpus);

struct NormalizationReport {
  double max_deviation = 0.0;
  Gram worst_context;
  size_t contexts_checked = 0;
};

// Sums p(w|h) over the whole predictable vocabulary for every context and
// reports the largest |sum - 1|. Throws UsageError when contexts x |V|
// exceeds `max_pairs`.
NormalizationReport ValidateNormalization(const BackoffModel &model,
                                          size_t max_pairs = 1000000);

struct InterpolationSpec {
  enum class Mode {
    // Stores the union of both models' grams with mixed probabilities and
    // renormalized back-off weights (one ARPA file for the decoder).
    kUnion,
    // Additionally stores every vocabulary word under every context, so
    // every query equals the mixture exactly. Size is contexts x |V|.
    kExact,
  };
  double lambda = 0.5;  // weight of model A
  Mode mode = Mode::kUnion;
};

BackoffModel Interpolate(const BackoffModel &a, const BackoffModel &b,
                         const InterpolationSpec &spec);

// ARPA text. Values are written with 8 decimals; grams sorted by token ids.
std::string WriteArpa(const BackoffModel &model);
void WriteArpaFile(const BackoffModel &model, const std::string &path);
BackoffModel ReadArpa(std::istream &in, const std::string &name = "<arpa>");
BackoffModel ReadArpaString(const std::string &text);
BackoffModel ReadArpaFile(const std::string &path);

}  // namespace swlm

#endif  // SWLM_BACKOFF_MODEL_H_
