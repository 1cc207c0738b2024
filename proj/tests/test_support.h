#ifndef SWLM_TEST_SUPPORT_H_
#define SWLM_TEST_SUPPORT_H_

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "swlm/corpus_io.h"
#include "swlm/util.h"
#include "swlm/vocabulary.h"

namespace swlm::testing {

inline std::vector<std::string> Words(const std::string &s) {
  return SplitWhitespace(s);
}

inline TextCorpus Text(const std::vector<std::string> &lines) {
  TextCorpus out;
  for (const auto &l : lines) out.push_back(SplitWhitespace(l));
  return out;
}

inline Vocabulary VocabOf(const std::vector<std::string> &tokens) {
  return Vocabulary::FromTokens(tokens);
}

inline Gram G(const Vocabulary &v, const std::string &s) {
  Gram g;
  for (const auto &t : SplitWhitespace(s)) g.push_back(*v.Find(t));
  return g;
}

// Fresh scratch directory under the system temp dir, per process so that
// tests can run in parallel.
inline std::filesystem::path TempDir(const std::string &name) {
  auto p = std::filesystem::temp_directory_path() /
           ("swlm_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string DataPath(const std::string &file) {
  return std::string(SWLM_TEST_DATA) + "/" + file;
}

// Random corpus over regular tokens "t0".."t{n-1}".
inline TextCorpus RandomText(uint64_t seed, size_t sentences, size_t types,
                             size_t max_len) {
  std::mt19937_64 rng(seed);
  TextCorpus out;
  for (size_t s = 0; s < sentences; ++s) {
    size_t len = 1 + rng() % max_len;
    std::vector<std::string> sent;
    for (size_t i = 0; i < len; ++i) sent.push_back("t" + std::to_string(rng() % types));
    out.push_back(sent);
  }
  return out;
}

}  // namespace swlm::testing

#endif  // SWLM_TEST_SUPPORT_H_
