#ifndef SWLM_SEGMENTATION_H_
#define SWLM_SEGMENTATION_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace swlm {

// How subwords are decorated so word boundaries survive tokenization.
//   kRightMarked: inter+ nation+ al
//   kBothMarked:  inter+ +nation+ +al
struct MarkingScheme {
  enum class Variant { kRightMarked, kBothMarked };
  Variant variant = Variant::kRightMarked;
  std::string marker = "+";

  static MarkingScheme Parse(std::string_view name, std::string marker = "+");
  std::string Name() const;
};

// Splits UTF-8 text into extended grapheme clusters.
std::vector<std::string> Graphemes(std::string_view text);

// Word -> unmarked subword units, e.g. from an external Morfessor run.
class SegmentationMap {
 public:
  // Throws if the units do not concatenate to the word.
  void Add(const std::string &word, std::vector<std::string> units);
  const std::vector<std::string> *Find(const std::string &word) const;
  size_t size() const { return entries_.size(); }

  // `word<TAB>sub1 sub2 ...` per line.
  static SegmentationMap Read(const std::string &path);

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

// Marked subwords for one word. Without a map, or when the word is missing
// from it, the word is split into grapheme clusters.
std::vector<std::string> SegmentWord(std::string_view word,
                                     const MarkingScheme &scheme,
                                     const SegmentationMap *map = nullptr);

// Segments every whitespace separated word of a line.
std::vector<std::string> SegmentLine(std::string_view line,
                                     const MarkingScheme &scheme,
                                     const SegmentationMap *map = nullptr);

// Inverse of segmentation. Throws on a dangling marker or a token that
// violates the scheme's marker grammar.
std::vector<std::string> Reconstruct(std::span<const std::string> tokens,
                                     const MarkingScheme &scheme);

// Like Reconstruct, but also reports how many subwords formed each word.
std::vector<std::pair<std::string, size_t>> ReconstructWithLengths(
    std::span<const std::string> tokens, const MarkingScheme &scheme);

// Test words absent from training, minus single-grapheme words and words
// with a grapheme never seen in training. Sorted and unique.
std::vector<std::string> ExtractOovKeywords(
    std::span<const std::string> train_words,
    std::span<const std::string> test_words);

struct LengthStats {
  size_t occurrences = 0;
  size_t subwords = 0;
  bool defined() const { return occurrences > 0; }
  // Mean subwords per occurrence; nullopt when no word of the set occurred.
  std::optional<double> Mean() const {
    if (!defined()) return std::nullopt;
    return static_cast<double>(subwords) / static_cast<double>(occurrences);
  }
};

// `corpus` is segmented text (one tokenized sentence per element).
LengthStats ComputeLengthStats(
    const std::vector<std::vector<std::string>> &corpus,
    std::span<const std::string> word_set, const MarkingScheme &scheme);

}  // namespace swlm

#endif  // SWLM_SEGMENTATION_H_
