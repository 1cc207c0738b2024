#ifndef SWLM_CORPUS_IO_H_
#define SWLM_CORPUS_IO_H_

#include <string>
#include <vector>

#include "swlm/vocabulary.h"

namespace swlm {

// One sentence as token ids; <s> and </s> are implicit.
using Sentence = std::vector<TokenId>;
using Corpus = std::vector<Sentence>;
using TextCorpus = std::vector<std::vector<std::string>>;

// UTF-8, one sentence per line, tokens separated by single spaces. Blank
// lines are skipped. Boundary tokens inside a line are rejected.
TextCorpus ReadTextCorpus(const std::string &path);
void WriteTextCorpus(const std::string &path, const TextCorpus &corpus);

// Throws if a sentence contains <s> or </s>; unknown strings map to <unk>.
Corpus ToIds(const TextCorpus &text, const Vocabulary &vocab);
TextCorpus ToText(const Corpus &corpus, const Vocabulary &vocab);

// Number of predicted tokens including one </s> per sentence.
size_t CountPredictions(const Corpus &corpus);

struct Keyword {
  std::string id;
  std::string text;  // one or more space separated words
};

// `id<TAB>keyword words` per line.
std::vector<Keyword> ReadKeywordList(const std::string &path);
void WriteKeywordList(const std::string &path,
                      const std::vector<Keyword> &keywords);

// Whitespace separated words per line.
std::vector<std::vector<std::string>> ReadWordLines(const std::string &path);

}  // namespace swlm

#endif  // SWLM_CORPUS_IO_H_
