#ifndef SWLM_KWS_H_
#define SWLM_KWS_H_

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swlm/backoff_model.h"
#include "swlm/corpus_io.h"
#include "swlm/segmentation.h"

namespace swlm {

struct Occurrence {
  std::string keyword;
  double begin = 0.0;
  double duration = 0.0;
  double Midpoint() const { return begin + duration / 2.0; }
};

struct ReferenceSet {
  std::vector<Occurrence> occurrences;
  double total_duration = 0.0;  // T, seconds

  void Validate() const;
  // Reference count and occupied time per keyword.
  std::map<std::string, std::pair<size_t, double>> PerKeyword() const;
};

struct Detection {
  Occurrence where;
  double score = 0.0;
};

using DetectionSet = std::vector<Detection>;
void ValidateDetections(const DetectionSet &dets);

struct Alignment {
  std::vector<Detection> detections;
  std::vector<bool> hit;  // parallel to detections
  size_t missed = 0;      // references left unmatched
};

// Greedy one-to-one matching per keyword on midpoints: candidate pairs
// within `tol` are taken by increasing distance, then decreasing score,
// then input order.
Alignment Align(const DetectionSet &dets, const ReferenceSet &refs,
                double tol = 0.5);

struct KeywordRates {
  std::string keyword;
  double p_miss = 1.0;
  double p_fa = 0.0;
};

struct TwvResult {
  std::vector<double> thresholds;  // ascending, distinct
  std::vector<double> twv;         // parallel to thresholds
  double mtwv = 0.0;
  // Highest threshold reaching mtwv; +inf for an empty detection set.
  double best_threshold = std::numeric_limits<double>::infinity();
  std::vector<KeywordRates> rates;  // at best_threshold
  double recall = 0.0;              // over all detections, ignoring scores
  size_t keywords = 0;              // keywords with at least one reference
};

inline constexpr double kDefaultBeta = 999.9;

// TWV(t) = 1 - mean_k [P_miss(k,t) + beta * P_FA(k,t)] keeping detections
// with score >= t, where P_FA(k,t) = N_FA / (T - reference time of k).
// Keywords without references are left out of the mean.
TwvResult TwvCurve(const Alignment &alignment, const ReferenceSet &refs,
                   double beta = kDefaultBeta);

struct SweepRow {
  std::string label;
  TwvResult result;
  std::optional<size_t> ngrams;
  std::optional<double> perplexity;
};

// Tab separated:
// label  mtwv  threshold  recall  keywords  ngrams  perplexity
std::string SweepReport(const std::vector<SweepRow> &rows);

// `duration <T>` header line, then `kwid tbeg dur` lines.
ReferenceSet ReadReferences(const std::string &path);
void WriteReferences(const std::string &path, const ReferenceSet &refs);
// `kwid tbeg dur score` lines.
DetectionSet ReadDetections(const std::string &path);
void WriteDetections(const std::string &path, const DetectionSet &dets);

// Lattice-free stand-in for a decoder, used to drive the sweeps. Test words
// are laid out one per second. At every window of test words within
// `max_edits` grapheme edits of a keyword, the keyword is hypothesized with
//   score = mean log10 p(subword | preceding test subwords)
//           - acoustic_weight * edits
// and kept when the score reaches `beam`.
struct SurrogateConfig {
  double acoustic_weight = 0.5;
  double beam = -3.0;
  int max_edits = 2;
};

ReferenceSet BuildReferences(const std::vector<std::vector<std::string>> &test_words,
                             const std::vector<Keyword> &keywords);

DetectionSet SimulateDetections(
    const BackoffModel &lm,
    const std::vector<std::vector<std::string>> &test_words,
    const std::vector<Keyword> &keywords, const MarkingScheme &scheme,
    const SegmentationMap *map, const SurrogateConfig &config = {});

// Levenshtein distance over grapheme clusters.
size_t GraphemeEditDistance(const std::string &a, const std::string &b);

}  // namespace swlm

#endif  // SWLM_KWS_H_
