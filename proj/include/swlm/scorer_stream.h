#ifndef SWLM_SCORER_STREAM_H_
#define SWLM_SCORER_STREAM_H_

#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <span>
#include <unordered_map>
#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "swlm/corpus_io.h"

namespace swlm {

using DistributionVisitor = std::function<void(std::span<const double>)>;

// Anything that yields next-token distributions over the predictable
// vocabulary (indexed by Vocabulary::OutputIndex).
class SequenceScorer {
 public:
  virtual ~SequenceScorer() = default;
  virtual size_t OutputSize() const = 0;
  virtual uint64_t VocabHash() const = 0;
  // Calls `visit` once per prediction position of the sentence: before each
  // of its tokens and finally before </s>. State never crosses sentences.
  virtual void ScoreSentence(std::span<const TokenId> sentence,
                             const DistributionVisitor &visit) const = 0;
};

struct StreamHeader {
  uint64_t vocab_hash = 0;
  uint32_t k = 0;
  bool full_vectors = false;
  uint32_t output_size = 0;  // predictable vocabulary size

  size_t TopKLength() const {
    return output_size == 0 ? 0 : std::min<size_t>(k, output_size - 1);
  }
  bool operator==(const StreamHeader &) const = default;
};

// One prediction position: the observed token, its probability, and the
// K most probable other tokens (descending, ties by ascending id).
struct ScorerRecord {
  size_t sentence = 0;
  size_t position = 0;  // index of the predicted token; size() means </s>
  TokenId observed = 0;
  double p_obs = 0.0;
  std::vector<std::pair<TokenId, double>> topk;
  std::vector<double> full;  // whole distribution when full_vectors is set

  bool operator==(const ScorerRecord &) const = default;
};

ScorerRecord MakeRecord(std::span<const double> distribution, TokenId observed,
                        uint32_t k, bool full_vectors);

// Sequential reader over a stream, whatever its backing.
class RecordSource {
 public:
  virtual ~RecordSource() = default;
  virtual const StreamHeader &header() const = 0;
  virtual bool Next(ScorerRecord &record) = 0;
};

struct ScorerStream {
  StreamHeader header;
  std::vector<ScorerRecord> records;
};

class MemorySource : public RecordSource {
 public:
  explicit MemorySource(const ScorerStream &stream) : stream_(stream) {}
  const StreamHeader &header() const override { return stream_.header; }
  bool Next(ScorerRecord &record) override;

 private:
  const ScorerStream &stream_;
  size_t next_ = 0;
};

// Scores the corpus on demand; nothing is materialized beyond one sentence.
class LiveSource : public RecordSource {
 public:
  LiveSource(const SequenceScorer &scorer, const Corpus &corpus, uint32_t k,
             bool full_vectors);
  const StreamHeader &header() const override { return header_; }
  bool Next(ScorerRecord &record) override;

 private:
  const SequenceScorer &scorer_;
  const Corpus &corpus_;
  StreamHeader header_;
  size_t sentence_ = 0;
  std::vector<ScorerRecord> buffer_;
  size_t buffered_ = 0;
};

// Binary stream file:
//   "SWSS" u32 version | u64 vocab_hash | u32 K | u8 full | u32 |V|
//   per position: u:varint p_obs:f64 {id:varint p:f64} x min(K,|V|-1)
//                 [|V| x f64 when full]
class StreamWriter {
 public:
  StreamWriter(const std::string &path, const StreamHeader &header);
  void Write(const ScorerRecord &record);
  void Close();

 private:
  std::ofstream out_;
  StreamHeader header_;
};

class FileSource : public RecordSource {
 public:
  explicit FileSource(const std::string &path);
  const StreamHeader &header() const override { return header_; }
  bool Next(ScorerRecord &record) override;

 private:
  std::ifstream in_;
  StreamHeader header_;
  size_t sentence_ = 0;
  size_t position_ = 0;
};

// One record per prediction position, in corpus order.
void EmitScorerStream(const SequenceScorer &scorer, const Corpus &corpus,
                      uint32_t k, bool full_vectors,
                      const std::function<void(const ScorerRecord &)> &sink);

ScorerStream CollectScorerStream(const SequenceScorer &scorer,
                                 const Corpus &corpus, uint32_t k,
                                 bool full_vectors);

void WriteScorerStream(const std::string &path, const SequenceScorer &scorer,
                       const Corpus &corpus, uint32_t k, bool full_vectors);

ScorerStream ReadScorerStream(const std::string &path);

// Rebuilds the corpus from the observed tokens of a stream.
Corpus CorpusFromStream(RecordSource &source);

// Deterministic table-driven scorer keyed by the full sentence prefix
// (without <s>). Prefixes with no explicit entry get `fallback`, or the
// uniform distribution when fallback is empty. Handy for hand-checkable
// fixtures and as a stand-in for external models.
class TableScorer : public SequenceScorer {
 public:
  TableScorer(size_t output_size, uint64_t vocab_hash)
      : output_size_(output_size), vocab_hash_(vocab_hash) {}

  void Set(const Gram &prefix, std::vector<double> distribution);
  // Sets p(observed | prefix) = p and spreads 1-p uniformly over the rest.
  void SetPeaked(const Gram &prefix, TokenId observed, double p);
  void SetFallback(std::vector<double> distribution) {
    fallback_ = std::move(distribution);
  }

  size_t OutputSize() const override { return output_size_; }
  uint64_t VocabHash() const override { return vocab_hash_; }
  void ScoreSentence(std::span<const TokenId> sentence,
                     const DistributionVisitor &visit) const override;

 private:
  size_t output_size_;
  uint64_t vocab_hash_;
  std::vector<double> fallback_;
  std::unordered_map<Gram, std::vector<double>, GramHash> table_;
};

}  // namespace swlm

#endif  // SWLM_SCORER_STREAM_H_
