#include "swlm/approximator.h"

#include <algorithm>
#include <fstream>
#include <map>

#include "swlm/error.h"
#include "swlm/util.h"

namespace swlm {

namespace {

constexpr uint32_t kTableVersion = 1;

// Walks a stream keeping the current padded prefix (<s> w1 .. w_{i-1}).
template <typename Fn>
void ForEachPosition(RecordSource &stream, Fn &&fn) {
  Gram prefix{Vocabulary::kBos};
  ScorerRecord rec;
  while (stream.Next(rec)) {
    fn(std::span<const TokenId>(prefix), rec);
    if (rec.observed == Vocabulary::kEos) {
      prefix.assign(1, Vocabulary::kBos);
    } else {
      prefix.push_back(rec.observed);
    }
  }
  if (prefix.size() != 1) throw DataError("scorer stream ends mid-sentence");
}

}  // namespace

std::string MethodName(ScoreMethod m) {
  switch (m) {
    case ScoreMethod::kPc: return "pc";
    case ScoreMethod::kOurs: return "ours";
    default: return "oracle";
  }
}

std::optional<std::vector<std::pair<TokenId, double>>> ScoreTable::Scores(
    std::span<const TokenId> h) const {
  const auto *ctx = acc.table().Find(h);
  if (!ctx) return std::nullopt;
  std::vector<std::pair<TokenId, double>> out;
  out.reserve(ctx->size());
  for (const auto &[w, cell] : ctx->Sorted()) {
    double score = method == ScoreMethod::kPc
                       ? cell.sum / static_cast<double>(cell.hits)
                       : cell.sum / static_cast<double>(ctx->count);
    out.emplace_back(w, score);
  }
  return out;
}

std::optional<std::vector<std::pair<TokenId, double>>>
ScoreTable::NormalizedScores(std::span<const TokenId> h) const {
  auto scores = Scores(h);
  if (!scores) return std::nullopt;
  if (method != ScoreMethod::kPc) return scores;
  std::vector<double> ys;
  for (const auto &[w, y] : *scores) ys.push_back(y);
  double z = PairwiseSum(ys);
  if (normalizer == PcNormalizer::kFullVector) {
    auto it = unobserved_mass.find(Gram(h.begin(), h.end()));
    if (it != unobserved_mass.end())
      z += it->second / static_cast<double>(Positions(h));
  }
  if (!(z > 0.0)) return std::nullopt;
  for (auto &[w, y] : *scores) y /= z;
  return scores;
}

void ScoreTable::Merge(const ScoreTable &other) {
  if (other.method != method || other.order != order || other.k != k ||
      other.normalizer != normalizer)
    throw DataError("cannot merge score tables with different settings");
  acc.Merge(other.acc);
  std::vector<const Gram *> keys;
  for (const auto &[g, m] : other.unobserved_mass) keys.push_back(&g);
  std::sort(keys.begin(), keys.end(),
            [](const Gram *a, const Gram *b) { return *a < *b; });
  for (const Gram *g : keys) unobserved_mass[*g] += other.unobserved_mass.at(*g);
}

void ScoreTable::Write(std::ostream &os) const {
  bin::WriteHeader(os, "SWST", kTableVersion);
  bin::WriteU8(os, static_cast<uint8_t>(method));
  bin::WriteU32(os, static_cast<uint32_t>(order));
  bin::WriteU32(os, k);
  bin::WriteU8(os, static_cast<uint8_t>(normalizer));
  acc.Write(os);
  std::vector<const Gram *> keys;
  for (const auto &[g, m] : unobserved_mass) keys.push_back(&g);
  std::sort(keys.begin(), keys.end(),
            [](const Gram *a, const Gram *b) { return *a < *b; });
  bin::WriteU64(os, keys.size());
  for (const Gram *g : keys) {
    bin::WriteVarint(os, g->size());
    for (TokenId t : *g) bin::WriteVarint(os, t);
    bin::WriteF64(os, unobserved_mass.at(*g));
  }
}

ScoreTable ScoreTable::Read(std::istream &is) {
  bin::ExpectHeader(is, "SWST", kTableVersion);
  ScoreTable t;
  uint8_t method = bin::ReadU8(is);
  if (method > 2) throw DataError("unknown score table method");
  t.method = static_cast<ScoreMethod>(method);
  t.order = static_cast<int>(bin::ReadU32(is));
  t.k = bin::ReadU32(is);
  uint8_t norm = bin::ReadU8(is);
  if (norm > 1) throw DataError("unknown PC normalizer");
  t.normalizer = static_cast<PcNormalizer>(norm);
  t.acc = ProbAccumulator::Read(is);
  uint64_t n = bin::ReadU64(is);
  for (uint64_t i = 0; i < n; ++i) {
    Gram g(bin::ReadVarint(is));
    for (auto &tok : g) tok = static_cast<TokenId>(bin::ReadVarint(is));
    t.unobserved_mass[g] = bin::ReadF64(is);
  }
  return t;
}

void ScoreTable::Save(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  Write(out);
}

ScoreTable ScoreTable::Load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return Read(in);
}

ScoreTable PcScores(RecordSource &stream, const CountTrie &counts, int n,
                    PcNormalizer normalizer) {
  if (n < 1) throw UsageError("order must be >= 1");
  const StreamHeader &header = stream.header();
  if (normalizer == PcNormalizer::kFullVector && !header.full_vectors)
    throw DataError(
        "probability conversion needs a scorer stream with full vectors");
  if (counts.vocab_hash() != header.vocab_hash)
    throw DataError("counts and scorer stream use different vocabularies");
  if (counts.max_order() < n)
    throw DataError("counts do not cover order " + std::to_string(n));

  ScoreTable table;
  table.method = ScoreMethod::kPc;
  table.order = n;
  table.k = header.k;
  table.normalizer = normalizer;
  table.acc = ProbAccumulator(header.vocab_hash, n);

  const size_t vsize = header.output_size;
  std::vector<uint8_t> observed_mark(vsize, 0);
  const size_t max_hist = static_cast<size_t>(n) - 1;
  ForEachPosition(stream, [&](std::span<const TokenId> prefix,
                              const ScorerRecord &rec) {
    for (size_t len = 0; len <= std::min(max_hist, prefix.size()); ++len) {
      auto h = prefix.subspan(prefix.size() - len, len);
      const auto *ctx = counts.table().Find(h);
      if (!ctx || !ctx->Find(rec.observed))
        throw DataError("counts do not cover the scorer stream's corpus");
      table.acc.AddPosition(h);
      table.acc.Accumulate(h, rec.observed, rec.p_obs);
      if (normalizer != PcNormalizer::kFullVector) continue;
      for (const auto &[v, c] : ctx->entries())
        observed_mark[Vocabulary::OutputIndex(v)] = 1;
      double unobserved = 0.0;
      for (size_t i = 0; i < vsize; ++i)
        if (!observed_mark[i]) unobserved += rec.full[i];
      for (const auto &[v, c] : ctx->entries())
        observed_mark[Vocabulary::OutputIndex(v)] = 0;
      table.unobserved_mass[Gram(h.begin(), h.end())] += unobserved;
    }
  });
  return table;
}

ScoreTable OursScores(RecordSource &stream, int n,
                      const ContextSet *candidate_contexts) {
  if (n < 1) throw UsageError("order must be >= 1");
  const StreamHeader &header = stream.header();
  ScoreTable table;
  table.method = ScoreMethod::kOurs;
  table.order = n;
  table.k = header.k;
  table.acc = ProbAccumulator(header.vocab_hash, n);
  const size_t max_hist = static_cast<size_t>(n) - 1;
  Gram key;
  ForEachPosition(stream, [&](std::span<const TokenId> prefix,
                              const ScorerRecord &rec) {
    for (size_t len = 0; len <= std::min(max_hist, prefix.size()); ++len) {
      auto h = prefix.subspan(prefix.size() - len, len);
      if (candidate_contexts && len > 0) {
        key.assign(h.begin(), h.end());
        if (!candidate_contexts->count(key)) continue;
      }
      table.acc.AddPosition(h);
      table.acc.Accumulate(h, rec.observed, rec.p_obs);
      for (const auto &[w, p] : rec.topk) table.acc.Accumulate(h, w, p);
    }
  });
  return table;
}

std::vector<double> OracleMarginalize(const Corpus &corpus,
                                      const SequenceScorer &scorer,
                                      std::span<const TokenId> h) {
  // Distinct padded prefixes ending in h, with their counts c(bh).
  std::map<Gram, uint64_t> prefixes;
  for (const auto &s : corpus) {
    Gram padded{Vocabulary::kBos};
    padded.insert(padded.end(), s.begin(), s.end());
    for (size_t end = 1; end <= padded.size(); ++end) {
      if (end < h.size()) continue;
      if (std::equal(h.begin(), h.end(), padded.begin() + (end - h.size())))
        ++prefixes[Gram(padded.begin(), padded.begin() + end)];
    }
  }
  if (prefixes.empty())
    throw DataError("history never occurs in the corpus");
  uint64_t total = 0;
  for (const auto &[p, c] : prefixes) total += c;

  std::vector<double> out(scorer.OutputSize(), 0.0);
  for (const auto &[prefix, c] : prefixes) {
    std::span<const TokenId> words(prefix.data() + 1, prefix.size() - 1);
    std::vector<double> last;
    scorer.ScoreSentence(words, [&](std::span<const double> d) {
      last.assign(d.begin(), d.end());
    });
    const double weight = static_cast<double>(c) / static_cast<double>(total);
    for (size_t i = 0; i < out.size(); ++i) out[i] += weight * last[i];
  }
  return out;
}

std::vector<double> OracleMarginalize(const Corpus &corpus,
                                      const RnnParams &params,
                                      std::span<const TokenId> h) {
  RnnScorer scorer(params);
  return OracleMarginalize(corpus, scorer, h);
}

}  // namespace swlm
