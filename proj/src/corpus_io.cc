#include "swlm/corpus_io.h"

#include <fstream>

#include "swlm/error.h"
#include "swlm/util.h"

namespace swlm {

TextCorpus ReadTextCorpus(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  TextCorpus corpus;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    auto tokens = SplitOn(line, ' ');
    for (const auto &t : tokens) {
      if (t.empty())
        throw DataError(path + ":" + std::to_string(lineno) +
                        ": empty token (tokens must be separated by single spaces)");
      if (t == Vocabulary::kBosToken || t == Vocabulary::kEosToken)
        throw DataError(path + ":" + std::to_string(lineno) +
                        ": sentence boundary token inside a sentence");
    }
    corpus.push_back(std::move(tokens));
  }
  return corpus;
}

void WriteTextCorpus(const std::string &path, const TextCorpus &corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (const auto &s : corpus) {
    for (size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
    out << '\n';
  }
}

Corpus ToIds(const TextCorpus &text, const Vocabulary &vocab) {
  Corpus corpus;
  corpus.reserve(text.size());
  for (const auto &s : text) {
    Sentence ids;
    ids.reserve(s.size());
    for (const auto &t : s) {
      TokenId id = vocab.IdOrUnk(t);
      if (id == Vocabulary::kBos || id == Vocabulary::kEos)
        throw DataError("sentence boundary token inside a sentence");
      ids.push_back(id);
    }
    corpus.push_back(std::move(ids));
  }
  return corpus;
}

TextCorpus ToText(const Corpus &corpus, const Vocabulary &vocab) {
  TextCorpus out;
  for (const auto &s : corpus) {
    std::vector<std::string> line;
    for (TokenId t : s) line.push_back(vocab.Token(t));
    out.push_back(std::move(line));
  }
  return out;
}

size_t CountPredictions(const Corpus &corpus) {
  size_t n = 0;
  for (const auto &s : corpus) n += s.size() + 1;
  return n;
}

std::vector<Keyword> ReadKeywordList(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<Keyword> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (Trim(line).empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected 'id<TAB>keyword'");
    Keyword kw{std::string(Trim(std::string_view(line).substr(0, tab))),
               std::string(Trim(std::string_view(line).substr(tab + 1)))};
    ParseInt(kw.id, path + ":" + std::to_string(lineno));
    if (kw.text.empty())
      throw DataError(path + ":" + std::to_string(lineno) + ": empty keyword");
    out.push_back(std::move(kw));
  }
  return out;
}

void WriteKeywordList(const std::string &path,
                      const std::vector<Keyword> &keywords) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (const auto &kw : keywords) out << kw.id << '\t' << kw.text << '\n';
}

std::vector<std::vector<std::string>> ReadWordLines(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    auto words = SplitWhitespace(line);
    if (!words.empty()) out.push_back(std::move(words));
  }
  return out;
}

}  // namespace swlm
