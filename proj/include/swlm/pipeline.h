#ifndef SWLM_PIPELINE_H_
#define SWLM_PIPELINE_H_

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swlm/backoff_model.h"
#include "swlm/kws.h"
#include "swlm/model_builder.h"
#include "swlm/rnn.h"

namespace swlm {

// Flat key=value settings. '#' starts a comment line.
class Config {
 public:
  static Config ReadFile(const std::string &path);
  static Config Parse(const std::string &text, const std::string &name = "<config>");

  void Set(const std::string &key, const std::string &value) { values_[key] = value; }
  bool Has(const std::string &key) const { return values_.count(key) > 0; }
  std::optional<std::string> Get(const std::string &key) const;
  std::string GetString(const std::string &key, const std::string &fallback) const;
  double GetDouble(const std::string &key, double fallback) const;
  long long GetInt(const std::string &key, long long fallback) const;

  const std::map<std::string, std::string> &values() const { return values_; }
  // Sorted "key=value\n" lines; the config hash is taken over this text.
  std::string Canonical() const;
  std::string Hash() const;

 private:
  std::map<std::string, std::string> values_;
};

// Writes `<output>.manifest.json` describing one run: command, settings,
// and hashes of the inputs and outputs. Paths inside the manifest's
// directory are stored relative to it.
std::string WriteManifest(const std::string &output, const std::string &command,
                          const Config &config,
                          const std::vector<std::string> &inputs,
                          const std::vector<std::string> &outputs);

struct ManifestMismatch {
  std::string manifest;
  std::string path;
  std::string expected;
  std::string actual;  // "missing" when the file is gone
};

struct VerifyReport {
  size_t manifests = 0;
  size_t files_checked = 0;
  std::vector<ManifestMismatch> mismatches;
  bool ok() const { return mismatches.empty(); }
};

// Re-hashes every file named by the manifests in `dir`. Throws DataError
// when the directory holds no manifest.
VerifyReport VerifyManifests(const std::string &dir);

// Everything needed to score a model on keyword search.
struct KwsTask {
  std::vector<std::vector<std::string>> test_words;
  std::vector<Keyword> keywords;
  MarkingScheme scheme;
  const SegmentationMap *map = nullptr;
  SurrogateConfig surrogate;
  double tolerance = 0.5;
  double beta = kDefaultBeta;
};

TextCorpus SegmentWords(const std::vector<std::vector<std::string>> &words,
                        const MarkingScheme &scheme, const SegmentationMap *map);

// Surrogate detections, alignment and TWV for one model, plus its
// perplexity on the segmented test words.
SweepRow EvaluateModel(const std::string &label, const BackoffModel &lm,
                       const KwsTask &task);

struct SweepSetup {
  const Vocabulary *vocab = nullptr;
  const Corpus *train = nullptr;
  const RnnParams *rnn = nullptr;
  GrowConfig grow;
  uint32_t k = 3;
  double lambda = 0.5;  // weight of the RNN-derived model when interpolating
  const KwsTask *task = nullptr;
};

using ModelSink = std::function<void(const std::string &label, const BackoffModel &)>;

// RNNV model (top-K sums grown to n_max) for each K.
std::vector<SweepRow> SweepK(const SweepSetup &setup, const std::vector<uint32_t> &ks,
                             const ModelSink &sink = {});
// RNNV model for each n_max.
std::vector<SweepRow> SweepN(const SweepSetup &setup, const std::vector<int> &ns,
                             const ModelSink &sink = {});
// RNNV interpolated with the KNV baseline for each weight on RNNV.
std::vector<SweepRow> SweepLambda(const SweepSetup &setup,
                                  const std::vector<double> &lambdas,
                                  const ModelSink &sink = {});

}  // namespace swlm

#endif  // SWLM_PIPELINE_H_
