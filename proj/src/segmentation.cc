#include "swlm/segmentation.h"

#include <fstream>
#include <memory>
#include <set>

#include <unicode/brkiter.h>
#include <unicode/locid.h>
#include <unicode/unistr.h>

#include "swlm/error.h"
#include "swlm/util.h"

namespace swlm {

MarkingScheme MarkingScheme::Parse(std::string_view name, std::string marker) {
  MarkingScheme s;
  if (marker.empty()) throw UsageError("marker must be non-empty");
  s.marker = std::move(marker);
  if (name == "right" || name == "right-marked")
    s.variant = Variant::kRightMarked;
  else if (name == "both" || name == "both-marked")
    s.variant = Variant::kBothMarked;
  else
    throw UsageError("unknown marking scheme '" + std::string(name) + "'");
  return s;
}

std::string MarkingScheme::Name() const {
  return variant == Variant::kRightMarked ? "right-marked" : "both-marked";
}

std::vector<std::string> Graphemes(std::string_view text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  icu::UnicodeString ustr = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<icu::BreakIterator> it(
      icu::BreakIterator::createCharacterInstance(icu::Locale::getRoot(),
                                                  status));
  if (U_FAILURE(status)) throw DataError("ICU break iterator unavailable");
  it->setText(ustr);
  int32_t start = it->first();
  for (int32_t end = it->next(); end != icu::BreakIterator::DONE;
       start = end, end = it->next()) {
    std::string piece;
    ustr.tempSubStringBetween(start, end).toUTF8String(piece);
    out.push_back(std::move(piece));
  }
  return out;
}

void SegmentationMap::Add(const std::string &word,
                          std::vector<std::string> units) {
  std::string joined;
  for (const auto &u : units) {
    if (u.empty()) throw DataError("empty unit in segmentation of '" + word + "'");
    joined += u;
  }
  if (joined != word)
    throw DataError("segmentation units of '" + word +
                    "' do not concatenate to the word");
  entries_[word] = std::move(units);
}

const std::vector<std::string> *SegmentationMap::Find(
    const std::string &word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? nullptr : &it->second;
}

SegmentationMap SegmentationMap::Read(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  SegmentationMap map;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (Trim(line).empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError(path + ":" + std::to_string(lineno) + ": missing tab");
    std::string word = line.substr(0, tab);
    try {
      map.Add(word, SplitWhitespace(std::string_view(line).substr(tab + 1)));
    } catch (const DataError &e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return map;
}

std::vector<std::string> SegmentWord(std::string_view word,
                                     const MarkingScheme &scheme,
                                     const SegmentationMap *map) {
  if (word.empty()) throw DataError("cannot segment an empty word");
  if (word.find(scheme.marker) != std::string_view::npos)
    throw DataError("word '" + std::string(word) + "' contains the marker '" +
                    scheme.marker + "'");
  std::vector<std::string> units;
  const std::vector<std::string> *mapped =
      map ? map->Find(std::string(word)) : nullptr;
  units = mapped ? *mapped : Graphemes(word);

  const bool both = scheme.variant == MarkingScheme::Variant::kBothMarked;
  for (size_t i = 0; i < units.size(); ++i) {
    if (both && i > 0) units[i] = scheme.marker + units[i];
    if (i + 1 < units.size()) units[i] += scheme.marker;
  }
  return units;
}

std::vector<std::string> SegmentLine(std::string_view line,
                                     const MarkingScheme &scheme,
                                     const SegmentationMap *map) {
  std::vector<std::string> out;
  for (const auto &w : SplitWhitespace(line)) {
    auto units = SegmentWord(w, scheme, map);
    out.insert(out.end(), units.begin(), units.end());
  }
  return out;
}

std::vector<std::pair<std::string, size_t>> ReconstructWithLengths(
    std::span<const std::string> tokens, const MarkingScheme &scheme) {
  const std::string &m = scheme.marker;
  const bool both = scheme.variant == MarkingScheme::Variant::kBothMarked;
  std::vector<std::pair<std::string, size_t>> words;
  std::string current;
  size_t pieces = 0;
  bool in_word = false;
  for (size_t i = 0; i < tokens.size(); ++i) {
    std::string_view body = tokens[i];
    auto fail = [&](const char *why) {
      throw DataError("token " + std::to_string(i) + " '" + tokens[i] +
                      "': " + why);
    };
    bool starts = body.size() >= m.size() && body.substr(0, m.size()) == m;
    if (both) {
      if (in_word && !starts) fail("expected a leading marker inside a word");
      if (!in_word && starts) fail("leading marker at a word start");
      if (starts) body.remove_prefix(m.size());
    }
    bool ends = body.size() >= m.size() &&
                body.substr(body.size() - m.size()) == m;
    if (ends) body.remove_suffix(m.size());
    if (body.empty()) fail("token is only a marker");
    if (body.find(m) != std::string_view::npos) fail("marker inside a subword");
    current += body;
    ++pieces;
    in_word = ends;
    if (!in_word) {
      words.emplace_back(std::move(current), pieces);
      current.clear();
      pieces = 0;
    }
  }
  if (in_word) throw DataError("dangling marker: token stream ends mid-word");
  return words;
}

std::vector<std::string> Reconstruct(std::span<const std::string> tokens,
                                     const MarkingScheme &scheme) {
  std::vector<std::string> out;
  for (auto &[w, n] : ReconstructWithLengths(tokens, scheme))
    out.push_back(std::move(w));
  return out;
}

std::vector<std::string> ExtractOovKeywords(
    std::span<const std::string> train_words,
    std::span<const std::string> test_words) {
  std::set<std::string> train(train_words.begin(), train_words.end());
  std::set<std::string> chars;
  for (const auto &w : train)
    for (auto &g : Graphemes(w)) chars.insert(std::move(g));
  std::set<std::string> out;
  for (const auto &w : test_words) {
    if (train.count(w)) continue;
    auto gs = Graphemes(w);
    if (gs.size() <= 1) continue;
    bool known = true;
    for (const auto &g : gs) known = known && chars.count(g) > 0;
    if (known) out.insert(w);
  }
  return {out.begin(), out.end()};
}

LengthStats ComputeLengthStats(
    const std::vector<std::vector<std::string>> &corpus,
    std::span<const std::string> word_set, const MarkingScheme &scheme) {
  std::set<std::string> wanted(word_set.begin(), word_set.end());
  LengthStats stats;
  for (const auto &sentence : corpus) {
    for (const auto &[word, n] : ReconstructWithLengths(sentence, scheme)) {
      if (!wanted.count(word)) continue;
      ++stats.occurrences;
      stats.subwords += n;
    }
  }
  return stats;
}

}  // namespace swlm
