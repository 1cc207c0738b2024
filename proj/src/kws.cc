#include "swlm/kws.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "swlm/error.h"
#include "swlm/util.h"

namespace swlm {

namespace {

void CheckOccurrence(const Occurrence &o, const std::string &what) {
  if (o.keyword.empty()) throw DataError(what + " without a keyword id");
  if (!std::isfinite(o.begin) || !(o.duration > 0.0) || !std::isfinite(o.duration))
    throw DataError(what + " for '" + o.keyword + "' needs a finite begin and a positive duration");
}

std::string Num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Lines without blank ones and '#' comments, with 1-based line numbers.
std::vector<std::pair<size_t, std::vector<std::string>>> ReadFields(
    const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::pair<size_t, std::vector<std::string>>> out;
  std::string line;
  size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    auto t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    out.emplace_back(no, SplitWhitespace(t));
  }
  return out;
}

}  // namespace

void ReferenceSet::Validate() const {
  if (!(total_duration > 0.0) || !std::isfinite(total_duration))
    throw DataError("total speech duration must be positive");
  for (const auto &o : occurrences) {
    CheckOccurrence(o, "reference");
    if (o.begin + o.duration > total_duration + 1e-9)
      throw DataError("reference for '" + o.keyword +
                      "' ends after the total duration");
  }
}

std::map<std::string, std::pair<size_t, double>> ReferenceSet::PerKeyword() const {
  std::map<std::string, std::pair<size_t, double>> out;
  for (const auto &o : occurrences) {
    auto &[n, dur] = out[o.keyword];
    ++n;
    dur += o.duration;
  }
  return out;
}

void ValidateDetections(const DetectionSet &dets) {
  for (const auto &d : dets) {
    CheckOccurrence(d.where, "detection");
    if (!std::isfinite(d.score))
      throw DataError("detection for '" + d.where.keyword + "' has a non-finite score");
  }
}

Alignment Align(const DetectionSet &dets, const ReferenceSet &refs, double tol) {
  if (!(tol > 0.0)) throw UsageError("alignment tolerance must be positive");
  ValidateDetections(dets);
  std::map<std::string, std::vector<size_t>> ref_by_kw;
  for (size_t i = 0; i < refs.occurrences.size(); ++i)
    ref_by_kw[refs.occurrences[i].keyword].push_back(i);

  struct Pair {
    double dist;
    double score;
    size_t det;
    size_t ref;
  };
  std::vector<Pair> pairs;
  for (size_t d = 0; d < dets.size(); ++d) {
    auto it = ref_by_kw.find(dets[d].where.keyword);
    if (it == ref_by_kw.end()) continue;
    for (size_t r : it->second) {
      double dist = std::abs(dets[d].where.Midpoint() -
                             refs.occurrences[r].Midpoint());
      if (dist <= tol) pairs.push_back({dist, dets[d].score, d, r});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair &a, const Pair &b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.score != b.score) return a.score > b.score;
    if (a.det != b.det) return a.det < b.det;
    return a.ref < b.ref;
  });

  Alignment out;
  out.detections = dets;
  out.hit.assign(dets.size(), false);
  std::vector<bool> ref_used(refs.occurrences.size(), false);
  for (const auto &p : pairs) {
    if (out.hit[p.det] || ref_used[p.ref]) continue;
    out.hit[p.det] = true;
    ref_used[p.ref] = true;
  }
  out.missed = static_cast<size_t>(std::count(ref_used.begin(), ref_used.end(), false));
  return out;
}

TwvResult TwvCurve(const Alignment &alignment, const ReferenceSet &refs,
                   double beta) {
  if (!(beta > 0.0)) throw UsageError("beta must be positive");
  refs.Validate();
  auto per = refs.PerKeyword();
  if (per.empty()) throw DataError("no keyword has a reference occurrence");

  std::map<std::string, size_t> slot;
  std::vector<std::string> names;
  std::vector<double> nref, trials;
  for (const auto &[kw, stat] : per) {
    double t = refs.total_duration - stat.second;
    if (!(t > 0.0))
      throw DataError("references of '" + kw + "' cover the whole duration");
    slot[kw] = names.size();
    names.push_back(kw);
    nref.push_back(static_cast<double>(stat.first));
    trials.push_back(t);
  }
  const size_t nk = names.size();

  std::vector<size_t> order(alignment.detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return alignment.detections[a].score > alignment.detections[b].score;
  });

  std::vector<double> hits(nk, 0.0), fas(nk, 0.0);
  auto value = [&]() {
    std::vector<double> terms(nk);
    for (size_t k = 0; k < nk; ++k)
      terms[k] = (1.0 - hits[k] / nref[k]) + beta * fas[k] / trials[k];
    return 1.0 - PairwiseSum(terms) / static_cast<double>(nk);
  };

  TwvResult res;
  res.keywords = nk;
  std::vector<double> desc_thr, desc_twv;
  for (size_t i = 0; i < order.size();) {
    double s = alignment.detections[order[i]].score;
    for (; i < order.size() && alignment.detections[order[i]].score == s; ++i) {
      const auto &d = alignment.detections[order[i]];
      auto it = slot.find(d.where.keyword);
      if (it == slot.end()) continue;
      (alignment.hit[order[i]] ? hits : fas)[it->second] += 1.0;
    }
    desc_thr.push_back(s);
    desc_twv.push_back(value());
  }
  double total_hits = std::accumulate(hits.begin(), hits.end(), 0.0);
  double total_refs = std::accumulate(nref.begin(), nref.end(), 0.0);
  res.recall = total_hits / total_refs;

  if (desc_thr.empty()) {
    res.mtwv = 0.0;
  } else {
    size_t best = 0;
    for (size_t i = 1; i < desc_twv.size(); ++i)
      if (desc_twv[i] > desc_twv[best]) best = i;
    res.mtwv = desc_twv[best];
    res.best_threshold = desc_thr[best];
  }
  res.thresholds.assign(desc_thr.rbegin(), desc_thr.rend());
  res.twv.assign(desc_twv.rbegin(), desc_twv.rend());

  std::fill(hits.begin(), hits.end(), 0.0);
  std::fill(fas.begin(), fas.end(), 0.0);
  for (size_t i = 0; i < alignment.detections.size(); ++i) {
    const auto &d = alignment.detections[i];
    auto it = slot.find(d.where.keyword);
    if (it == slot.end() || d.score < res.best_threshold) continue;
    (alignment.hit[i] ? hits : fas)[it->second] += 1.0;
  }
  for (size_t k = 0; k < nk; ++k)
    res.rates.push_back({names[k], 1.0 - hits[k] / nref[k], fas[k] / trials[k]});
  return res;
}

std::string SweepReport(const std::vector<SweepRow> &rows) {
  if (rows.empty()) throw UsageError("sweep report needs at least one row");
  std::ostringstream os;
  os << "label\tmtwv\tthreshold\trecall\tkeywords\tngrams\tperplexity\n";
  for (const auto &r : rows) {
    os << r.label << '\t' << FormatFixed(r.result.mtwv, 6) << '\t';
    if (std::isfinite(r.result.best_threshold))
      os << FormatFixed(r.result.best_threshold, 6);
    else
      os << "inf";
    os << '\t' << FormatFixed(r.result.recall, 6) << '\t' << r.result.keywords
       << '\t';
    if (r.ngrams) os << *r.ngrams; else os << "NA";
    os << '\t';
    if (r.perplexity) os << FormatFixed(*r.perplexity, 4); else os << "NA";
    os << '\n';
  }
  return os.str();
}

ReferenceSet ReadReferences(const std::string &path) {
  ReferenceSet refs;
  bool header = false;
  for (const auto &[no, f] : ReadFields(path)) {
    std::string where = path + ":" + std::to_string(no);
    if (!header) {
      if (f.size() != 2 || f[0] != "duration")
        throw DataError(where + ": expected 'duration <seconds>' header");
      refs.total_duration = ParseDouble(f[1], where);
      header = true;
      continue;
    }
    if (f.size() != 3) throw DataError(where + ": expected 'kwid tbeg dur'");
    refs.occurrences.push_back(
        {f[0], ParseDouble(f[1], where), ParseDouble(f[2], where)});
  }
  if (!header) throw DataError(path + ": missing duration header");
  refs.Validate();
  return refs;
}

void WriteReferences(const std::string &path, const ReferenceSet &refs) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "duration " << Num(refs.total_duration) << '\n';
  for (const auto &o : refs.occurrences)
    out << o.keyword << ' ' << Num(o.begin) << ' ' << Num(o.duration) << '\n';
}

DetectionSet ReadDetections(const std::string &path) {
  DetectionSet dets;
  for (const auto &[no, f] : ReadFields(path)) {
    std::string where = path + ":" + std::to_string(no);
    if (f.size() != 4) throw DataError(where + ": expected 'kwid tbeg dur score'");
    dets.push_back({{f[0], ParseDouble(f[1], where), ParseDouble(f[2], where)},
                    ParseDouble(f[3], where)});
  }
  ValidateDetections(dets);
  return dets;
}

void WriteDetections(const std::string &path, const DetectionSet &dets) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (const auto &d : dets)
    out << d.where.keyword << ' ' << Num(d.where.begin) << ' '
        << Num(d.where.duration) << ' ' << Num(d.score) << '\n';
}

size_t GraphemeEditDistance(const std::string &a, const std::string &b) {
  auto x = Graphemes(a);
  auto y = Graphemes(b);
  std::vector<size_t> row(y.size() + 1);
  std::iota(row.begin(), row.end(), 0);
  for (size_t i = 1; i <= x.size(); ++i) {
    size_t diag = row[0];
    row[0] = i;
    for (size_t j = 1; j <= y.size(); ++j) {
      size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1,
                         diag + (x[i - 1] == y[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[y.size()];
}

namespace {

std::string JoinWords(const std::vector<std::string> &words, size_t from,
                      size_t n) {
  std::string s;
  for (size_t i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += words[from + i];
  }
  return s;
}

}  // namespace

ReferenceSet BuildReferences(const std::vector<std::vector<std::string>> &test_words,
                             const std::vector<Keyword> &keywords) {
  ReferenceSet refs;
  double t = 0.0;
  for (const auto &sent : test_words) {
    for (const auto &kw : keywords) {
      size_t m = SplitWhitespace(kw.text).size();
      if (m == 0 || m > sent.size()) continue;
      for (size_t i = 0; i + m <= sent.size(); ++i)
        if (JoinWords(sent, i, m) == kw.text)
          refs.occurrences.push_back({kw.id, t + static_cast<double>(i),
                                      static_cast<double>(m)});
    }
    t += static_cast<double>(sent.size());
  }
  refs.total_duration = t;
  std::stable_sort(refs.occurrences.begin(), refs.occurrences.end(),
                   [](const Occurrence &a, const Occurrence &b) {
                     return a.begin < b.begin;
                   });
  return refs;
}

DetectionSet SimulateDetections(
    const BackoffModel &lm,
    const std::vector<std::vector<std::string>> &test_words,
    const std::vector<Keyword> &keywords, const MarkingScheme &scheme,
    const SegmentationMap *map, const SurrogateConfig &config) {
  const Vocabulary &vocab = lm.vocab();
  auto to_ids = [&](const std::string &word) {
    std::vector<TokenId> ids;
    for (const auto &s : SegmentWord(word, scheme, map))
      ids.push_back(vocab.IdOrUnk(s));
    return ids;
  };

  struct Kw {
    const Keyword *kw;
    size_t words;
    size_t graphemes;
    std::vector<TokenId> ids;
  };
  std::vector<Kw> kws;
  for (const auto &k : keywords) {
    Kw e{&k, 0, Graphemes(k.text).size(), {}};
    for (const auto &w : SplitWhitespace(k.text)) {
      auto ids = to_ids(w);
      e.ids.insert(e.ids.end(), ids.begin(), ids.end());
      ++e.words;
    }
    if (e.words > 0) kws.push_back(std::move(e));
  }

  DetectionSet dets;
  double t = 0.0;
  std::vector<TokenId> history;
  for (const auto &sent : test_words) {
    std::vector<size_t> starts;  // subword offset of each word in history
    history.assign(1, Vocabulary::kBos);
    for (const auto &w : sent) {
      starts.push_back(history.size());
      auto ids = to_ids(w);
      history.insert(history.end(), ids.begin(), ids.end());
    }
    for (size_t i = 0; i < sent.size(); ++i) {
      for (const auto &k : kws) {
        if (i + k.words > sent.size()) continue;
        std::string window = JoinWords(sent, i, k.words);
        size_t len = Graphemes(window).size();
        size_t diff = len > k.graphemes ? len - k.graphemes : k.graphemes - len;
        if (diff > static_cast<size_t>(config.max_edits)) continue;
        size_t edits = GraphemeEditDistance(window, k.kw->text);
        if (edits > static_cast<size_t>(config.max_edits)) continue;
        std::vector<TokenId> ctx(history.begin(),
                                 history.begin() + static_cast<long>(starts[i]));
        double total = 0.0;
        for (TokenId id : k.ids) {
          total += lm.Log10Prob(ctx, id);
          ctx.push_back(id);
        }
        double score = total / static_cast<double>(k.ids.size()) -
                       config.acoustic_weight * static_cast<double>(edits);
        if (score >= config.beam)
          dets.push_back({{k.kw->id, t + static_cast<double>(i),
                           static_cast<double>(k.words)},
                          score});
      }
    }
    t += static_cast<double>(sent.size());
  }
  return dets;
}

}  // namespace swlm
