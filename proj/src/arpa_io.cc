#include <fstream>
#include <map>
#include <sstream>

#include "swlm/backoff_model.h"
#include "swlm/error.h"
#include "swlm/log.h"
#include "swlm/util.h"

namespace swlm {

namespace {
constexpr int kDecimals = 8;
}  // namespace

std::string WriteArpa(const BackoffModel &model) {
  std::ostringstream out;
  const Vocabulary &vocab = model.vocab();
  out << "\\data\\\n";
  for (int k = 1; k <= model.max_order(); ++k)
    out << "ngram " << k << "=" << model.NumNgrams(k) << "\n";
  out << "\n";
  for (int k = 1; k <= model.max_order(); ++k) {
    out << "\\" << k << "-grams:\n";
    for (const Gram *g : model.SortedGrams(k)) {
      const NgramEntry &e = model.Order(k).at(*g);
      out << FormatFixed(e.log10_prob, kDecimals) << '\t'
          << GramToString(vocab, *g);
      if (e.has_bow) out << '\t' << FormatFixed(e.log10_bow, kDecimals);
      out << '\n';
    }
    out << "\n";
  }
  out << "\\end\\\n";
  return out.str();
}

void WriteArpaFile(const BackoffModel &model, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << WriteArpa(model);
  if (!out) throw DataError("error writing " + path);
}

BackoffModel ReadArpa(std::istream &in, const std::string &name) {
  struct Line {
    size_t lineno;
    std::vector<std::string> fields;
  };
  std::map<int, size_t> declared;
  std::map<int, std::vector<Line>> sections;
  enum class State { kStart, kData, kGrams, kEnd } state = State::kStart;
  int current = 0;
  size_t lineno = 0;
  std::string raw;

  auto fail = [&](size_t at, const std::string &why) -> DataError {
    return DataError(name + ":" + std::to_string(at) + ": " + why);
  };
  auto close_section = [&](size_t at) {
    if (current == 0) return;
    size_t got = sections[current].size();
    if (got != declared[current])
      throw fail(at, "\\" + std::to_string(current) + "-grams: declared " +
                         std::to_string(declared[current]) + " entries, found " +
                         std::to_string(got));
  };

  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::string_view line = Trim(raw);
    if (state == State::kEnd) {
      if (!line.empty()) throw fail(lineno, "content after \\end\\");
      continue;
    }
    if (line.empty()) continue;
    if (line == "\\data\\") {
      if (state != State::kStart) throw fail(lineno, "duplicate \\data\\");
      state = State::kData;
      continue;
    }
    if (state == State::kStart) continue;  // header text before \data\ is ignored
    if (line == "\\end\\") {
      if (state == State::kData) throw fail(lineno, "\\end\\ before any n-grams");
      close_section(lineno);
      for (const auto &[k, n] : declared)
        if (!sections.count(k) && n > 0)
          throw fail(lineno, "missing \\" + std::to_string(k) + "-grams: section");
      state = State::kEnd;
      continue;
    }
    if (line.front() == '\\') {
      // \k-grams:
      if (line.size() < 8 || line.substr(line.size() - 7) != "-grams:")
        throw fail(lineno, "malformed section header '" + std::string(line) + "'");
      int k = static_cast<int>(ParseInt(line.substr(1, line.size() - 8),
                                        name + ":" + std::to_string(lineno)));
      if (!declared.count(k))
        throw fail(lineno, "section \\" + std::to_string(k) +
                               "-grams: not declared in \\data\\");
      if (k != current + 1)
        throw fail(lineno, "sections out of order");
      close_section(lineno);
      current = k;
      sections[k];
      state = State::kGrams;
      continue;
    }
    if (state == State::kData) {
      if (line.substr(0, 6) != "ngram ")
        throw fail(lineno, "expected 'ngram k=count'");
      auto eq = line.find('=');
      if (eq == std::string_view::npos) throw fail(lineno, "expected 'ngram k=count'");
      std::string ctx = name + ":" + std::to_string(lineno);
      int k = static_cast<int>(ParseInt(Trim(line.substr(6, eq - 6)), ctx));
      long long n = ParseInt(Trim(line.substr(eq + 1)), ctx);
      if (k < 1 || n < 0 || declared.count(k))
        throw fail(lineno, "bad ngram count line");
      declared[k] = static_cast<size_t>(n);
      continue;
    }
    auto fields = SplitWhitespace(line);
    if (fields.size() != static_cast<size_t>(current) + 1 &&
        fields.size() != static_cast<size_t>(current) + 2)
      throw fail(lineno, "expected " + std::to_string(current) +
                             " tokens in an entry of \\" + std::to_string(current) +
                             "-grams:");
    sections[current].push_back({lineno, std::move(fields)});
  }
  if (state != State::kEnd) throw fail(lineno, "missing \\end\\");
  for (int k = 1; k <= static_cast<int>(declared.size()); ++k)
    if (!declared.count(k)) throw fail(lineno, "orders in \\data\\ are not contiguous");
  if (!sections.count(1)) throw fail(lineno, "no unigrams");

  std::vector<std::string> tokens;
  for (const auto &l : sections[1]) tokens.push_back(l.fields[1]);
  Vocabulary vocab;
  for (const auto &l : sections[1]) {
    if (vocab.Find(l.fields[1]) && l.fields[1] != Vocabulary::kBosToken &&
        l.fields[1] != Vocabulary::kEosToken && l.fields[1] != Vocabulary::kUnkToken)
      throw fail(l.lineno, "duplicate unigram '" + l.fields[1] + "'");
    vocab.Add(l.fields[1]);
  }
  BackoffModel model(std::move(vocab));
  for (auto &[k, lines] : sections) {
    for (const auto &l : lines) {
      std::string ctx = name + ":" + std::to_string(l.lineno);
      Gram g;
      for (int i = 1; i <= k; ++i) {
        auto id = model.vocab().Find(l.fields[static_cast<size_t>(i)]);
        if (!id) throw fail(l.lineno, "token '" + l.fields[static_cast<size_t>(i)] +
                                          "' missing from the unigrams");
        g.push_back(*id);
      }
      if (model.Find(g)) throw fail(l.lineno, "duplicate entry");
      if (k > 1 && !model.Find(std::span(g).first(g.size() - 1)))
        throw fail(l.lineno, "entry has no stored prefix (not prefix-closed)");
      double lp = ParseDouble(l.fields[0], ctx);
      if (lp > 1e-9) throw fail(l.lineno, "positive log probability");
      NgramEntry &e = model.Set(g, lp);
      if (l.fields.size() == static_cast<size_t>(k) + 2) {
        e.has_bow = true;
        e.log10_bow = ParseDouble(l.fields.back(), ctx);
      }
    }
  }
  for (TokenId reserved : {Vocabulary::kBos, Vocabulary::kEos, Vocabulary::kUnk}) {
    Gram g{reserved};
    if (!model.Find(g)) {
      Log(LogLevel::kWarn, "arpa_missing_reserved",
          {{"token", model.vocab().Token(reserved)}});
      model.Set(g, kLog10Floor);
    }
  }
  return model;
}

BackoffModel ReadArpaString(const std::string &text) {
  std::istringstream in(text);
  return ReadArpa(in);
}

BackoffModel ReadArpaFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return ReadArpa(in, path);
}

}  // namespace swlm
