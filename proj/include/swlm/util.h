#ifndef SWLM_UTIL_H_
#define SWLM_UTIL_H_

#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swlm/error.h"

namespace swlm {

// 64-bit FNV-1a. Used for vocabulary fingerprints and manifest hashes;
// not a cryptographic hash.
class Fnv1a {
 public:
  void Update(const void *data, size_t size) {
    const auto *p = static_cast<const unsigned char *>(data);
    for (size_t i = 0; i < size; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void Update(std::string_view s) { Update(s.data(), s.size()); }
  uint64_t Digest() const { return state_; }

 private:
  uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string HexDigest(uint64_t value);

// Hash of a whole file's bytes, hex encoded.
std::string HashFile(const std::string &path);

std::vector<std::string> SplitWhitespace(std::string_view line);
std::string_view Trim(std::string_view s);

// Splits "a b  c" on single spaces; empty fields are returned as empty
// strings so callers can reject them.
std::vector<std::string> SplitOn(std::string_view s, char sep);

// Formats a double with fixed decimals, normalizing "-0.000000" to "0.000000".
std::string FormatFixed(double value, int decimals);

double ParseDouble(std::string_view s, const std::string &context);
long long ParseInt(std::string_view s, const std::string &context);

// Little-endian binary primitives shared by the snapshot formats.
namespace bin {

void WriteU8(std::ostream &os, uint8_t v);
void WriteU32(std::ostream &os, uint32_t v);
void WriteU64(std::ostream &os, uint64_t v);
void WriteF64(std::ostream &os, double v);
void WriteVarint(std::ostream &os, uint64_t v);
void WriteString(std::ostream &os, const std::string &s);

uint8_t ReadU8(std::istream &is);
uint32_t ReadU32(std::istream &is);
uint64_t ReadU64(std::istream &is);
double ReadF64(std::istream &is);
uint64_t ReadVarint(std::istream &is);
std::string ReadString(std::istream &is);

// Writes/checks a 4-byte magic followed by a u32 version.
void WriteHeader(std::ostream &os, std::string_view magic, uint32_t version);
void ExpectHeader(std::istream &is, std::string_view magic, uint32_t version);

}  // namespace bin

// Pairwise (cascade) summation; deterministic for a given input order.
double PairwiseSum(std::span<const double> values);

inline bool IsProbability(double p) { return p > 0.0 && p <= 1.0; }

}  // namespace swlm

#endif  // SWLM_UTIL_H_
