#include "swlm/scorer_stream.h"

#include <algorithm>
#include <numeric>

#include "swlm/error.h"
#include "swlm/util.h"

namespace swlm {

namespace {
constexpr uint32_t kStreamVersion = 1;
}  // namespace

ScorerRecord MakeRecord(std::span<const double> distribution, TokenId observed,
                        uint32_t k, bool full_vectors) {
  const size_t n = distribution.size();
  const size_t obs_index = Vocabulary::OutputIndex(observed);
  if (observed == Vocabulary::kBos || obs_index >= n)
    throw DataError("observed token " + std::to_string(observed) +
                    " outside the output vocabulary");
  ScorerRecord rec;
  rec.observed = observed;
  rec.p_obs = distribution[obs_index];
  if (!IsProbability(rec.p_obs))
    throw NumericalError("scorer produced p_obs outside (0,1]");

  const size_t take = n == 0 ? 0 : std::min<size_t>(k, n - 1);
  if (take > 0) {
    std::vector<uint32_t> idx;
    idx.reserve(n - 1);
    for (uint32_t i = 0; i < n; ++i)
      if (i != obs_index) idx.push_back(i);
    auto better = [&](uint32_t a, uint32_t b) {
      if (distribution[a] != distribution[b])
        return distribution[a] > distribution[b];
      return a < b;
    };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<long>(take),
                      idx.end(), better);
    rec.topk.reserve(take);
    for (size_t i = 0; i < take; ++i) {
      double p = distribution[idx[i]];
      if (!IsProbability(p))
        throw NumericalError("scorer produced a top-K probability outside (0,1]");
      rec.topk.emplace_back(Vocabulary::OutputToken(idx[i]), p);
    }
  }
  if (full_vectors) rec.full.assign(distribution.begin(), distribution.end());
  return rec;
}

bool MemorySource::Next(ScorerRecord &record) {
  if (next_ >= stream_.records.size()) return false;
  record = stream_.records[next_++];
  return true;
}

LiveSource::LiveSource(const SequenceScorer &scorer, const Corpus &corpus,
                       uint32_t k, bool full_vectors)
    : scorer_(scorer), corpus_(corpus) {
  header_.vocab_hash = scorer.VocabHash();
  header_.k = k;
  header_.full_vectors = full_vectors;
  header_.output_size = static_cast<uint32_t>(scorer.OutputSize());
}

bool LiveSource::Next(ScorerRecord &record) {
  while (buffered_ >= buffer_.size()) {
    if (sentence_ >= corpus_.size()) return false;
    buffer_.clear();
    buffered_ = 0;
    const Sentence &s = corpus_[sentence_];
    size_t pos = 0;
    scorer_.ScoreSentence(s, [&](std::span<const double> dist) {
      TokenId u = pos < s.size() ? s[pos] : Vocabulary::kEos;
      ScorerRecord r = MakeRecord(dist, u, header_.k, header_.full_vectors);
      r.sentence = sentence_;
      r.position = pos++;
      buffer_.push_back(std::move(r));
    });
    ++sentence_;
  }
  record = std::move(buffer_[buffered_++]);
  return true;
}

StreamWriter::StreamWriter(const std::string &path, const StreamHeader &header)
    : out_(path, std::ios::binary), header_(header) {
  if (!out_) throw DataError("cannot write " + path);
  bin::WriteHeader(out_, "SWSS", kStreamVersion);
  bin::WriteU64(out_, header.vocab_hash);
  bin::WriteU32(out_, header.k);
  bin::WriteU8(out_, header.full_vectors ? 1 : 0);
  bin::WriteU32(out_, header.output_size);
}

void StreamWriter::Write(const ScorerRecord &record) {
  if (record.topk.size() != header_.TopKLength())
    throw DataError("record top-K length does not match the stream header");
  bin::WriteVarint(out_, record.observed);
  bin::WriteF64(out_, record.p_obs);
  for (const auto &[id, p] : record.topk) {
    bin::WriteVarint(out_, id);
    bin::WriteF64(out_, p);
  }
  if (header_.full_vectors) {
    if (record.full.size() != header_.output_size)
      throw DataError("record lacks a full distribution");
    for (double p : record.full) bin::WriteF64(out_, p);
  }
}

void StreamWriter::Close() {
  out_.flush();
  if (!out_) throw DataError("error writing scorer stream");
  out_.close();
}

FileSource::FileSource(const std::string &path) : in_(path, std::ios::binary) {
  if (!in_) throw DataError("cannot open " + path);
  bin::ExpectHeader(in_, "SWSS", kStreamVersion);
  header_.vocab_hash = bin::ReadU64(in_);
  header_.k = bin::ReadU32(in_);
  header_.full_vectors = bin::ReadU8(in_) != 0;
  header_.output_size = bin::ReadU32(in_);
}

bool FileSource::Next(ScorerRecord &record) {
  if (in_.peek() == std::char_traits<char>::eof()) return false;
  record = ScorerRecord{};
  record.sentence = sentence_;
  record.position = position_;
  record.observed = static_cast<TokenId>(bin::ReadVarint(in_));
  if (record.observed == Vocabulary::kBos ||
      Vocabulary::OutputIndex(record.observed) >= header_.output_size)
    throw DataError("stream record with out-of-range observed token");
  record.p_obs = bin::ReadF64(in_);
  if (!IsProbability(record.p_obs))
    throw DataError("stream record with p_obs outside (0,1]");
  const size_t take = header_.TopKLength();
  record.topk.reserve(take);
  for (size_t i = 0; i < take; ++i) {
    TokenId id = static_cast<TokenId>(bin::ReadVarint(in_));
    double p = bin::ReadF64(in_);
    if (id == record.observed || id == Vocabulary::kBos ||
        Vocabulary::OutputIndex(id) >= header_.output_size || !IsProbability(p))
      throw DataError("malformed top-K entry in scorer stream");
    record.topk.emplace_back(id, p);
  }
  if (header_.full_vectors) {
    record.full.resize(header_.output_size);
    for (auto &p : record.full) p = bin::ReadF64(in_);
  }
  if (record.observed == Vocabulary::kEos) {
    ++sentence_;
    position_ = 0;
  } else {
    ++position_;
  }
  return true;
}

void EmitScorerStream(const SequenceScorer &scorer, const Corpus &corpus,
                      uint32_t k, bool full_vectors,
                      const std::function<void(const ScorerRecord &)> &sink) {
  LiveSource source(scorer, corpus, k, full_vectors);
  ScorerRecord rec;
  while (source.Next(rec)) sink(rec);
}

ScorerStream CollectScorerStream(const SequenceScorer &scorer,
                                 const Corpus &corpus, uint32_t k,
                                 bool full_vectors) {
  ScorerStream stream;
  stream.header = LiveSource(scorer, corpus, k, full_vectors).header();
  EmitScorerStream(scorer, corpus, k, full_vectors,
                   [&](const ScorerRecord &r) { stream.records.push_back(r); });
  return stream;
}

void WriteScorerStream(const std::string &path, const SequenceScorer &scorer,
                       const Corpus &corpus, uint32_t k, bool full_vectors) {
  LiveSource source(scorer, corpus, k, full_vectors);
  StreamWriter writer(path, source.header());
  ScorerRecord rec;
  while (source.Next(rec)) writer.Write(rec);
  writer.Close();
}

ScorerStream ReadScorerStream(const std::string &path) {
  FileSource source(path);
  ScorerStream stream;
  stream.header = source.header();
  ScorerRecord rec;
  while (source.Next(rec)) stream.records.push_back(rec);
  return stream;
}

Corpus CorpusFromStream(RecordSource &source) {
  Corpus corpus;
  Sentence current;
  ScorerRecord rec;
  while (source.Next(rec)) {
    if (rec.observed == Vocabulary::kEos) {
      corpus.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(rec.observed);
    }
  }
  if (!current.empty()) throw DataError("scorer stream ends mid-sentence");
  return corpus;
}

void TableScorer::Set(const Gram &prefix, std::vector<double> distribution) {
  if (distribution.size() != output_size_)
    throw UsageError("distribution size does not match the output vocabulary");
  table_[prefix] = std::move(distribution);
}

void TableScorer::SetPeaked(const Gram &prefix, TokenId observed, double p) {
  std::vector<double> d(output_size_,
                        (1.0 - p) / static_cast<double>(output_size_ - 1));
  d[Vocabulary::OutputIndex(observed)] = p;
  Set(prefix, std::move(d));
}

void TableScorer::ScoreSentence(std::span<const TokenId> sentence,
                                const DistributionVisitor &visit) const {
  const std::vector<double> uniform(output_size_,
                                    1.0 / static_cast<double>(output_size_));
  Gram prefix;
  for (size_t i = 0; i <= sentence.size(); ++i) {
    auto it = table_.find(prefix);
    if (it != table_.end()) visit(it->second);
    else visit(fallback_.empty() ? uniform : fallback_);
    if (i < sentence.size()) prefix.push_back(sentence[i]);
  }
}

}  // namespace swlm
