#include "swlm/util.h"

#include <bit>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>

namespace swlm {

std::string HexDigest(uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

std::string HashFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  Fnv1a h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h.Update(buf, static_cast<size_t>(in.gcount()));
  }
  return HexDigest(h.Digest());
}

std::vector<std::string> SplitWhitespace(std::string_view line) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])))
      ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string> SplitOn(std::string_view s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string FormatFixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  std::string s(buf);
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos)
    s.erase(0, 1);
  return s;
}

double ParseDouble(std::string_view s, const std::string &context) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError(context + ": not a number: '" + std::string(s) + "'");
  return v;
}

long long ParseInt(std::string_view s, const std::string &context) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError(context + ": not an integer: '" + std::string(s) + "'");
  return v;
}

namespace bin {

namespace {

template <typename T>
void WriteRaw(std::ostream &os, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (size_t i = 0; i < sizeof(T) / 2; ++i)
      std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  os.write(reinterpret_cast<const char *>(buf), sizeof(T));
}

template <typename T>
T ReadRaw(std::istream &is) {
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char *>(buf), sizeof(T));
  if (is.gcount() != static_cast<std::streamsize>(sizeof(T)))
    throw DataError("binary input truncated");
  if constexpr (std::endian::native == std::endian::big) {
    for (size_t i = 0; i < sizeof(T) / 2; ++i)
      std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void WriteU8(std::ostream &os, uint8_t v) { WriteRaw(os, v); }
void WriteU32(std::ostream &os, uint32_t v) { WriteRaw(os, v); }
void WriteU64(std::ostream &os, uint64_t v) { WriteRaw(os, v); }
void WriteF64(std::ostream &os, double v) { WriteRaw(os, v); }

void WriteVarint(std::ostream &os, uint64_t v) {
  while (v >= 0x80) {
    os.put(static_cast<char>((v & 0x7f) | 0x80));
    v >>= 7;
  }
  os.put(static_cast<char>(v));
}

void WriteString(std::ostream &os, const std::string &s) {
  WriteVarint(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

uint8_t ReadU8(std::istream &is) { return ReadRaw<uint8_t>(is); }
uint32_t ReadU32(std::istream &is) { return ReadRaw<uint32_t>(is); }
uint64_t ReadU64(std::istream &is) { return ReadRaw<uint64_t>(is); }
double ReadF64(std::istream &is) { return ReadRaw<double>(is); }

uint64_t ReadVarint(std::istream &is) {
  uint64_t v = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    int c = is.get();
    if (c == std::char_traits<char>::eof())
      throw DataError("binary input truncated in varint");
    v |= static_cast<uint64_t>(c & 0x7f) << shift;
    if (!(c & 0x80)) return v;
  }
  throw DataError("varint too long");
}

std::string ReadString(std::istream &is) {
  uint64_t n = ReadVarint(is);
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (is.gcount() != static_cast<std::streamsize>(n))
    throw DataError("binary input truncated in string");
  return s;
}

void WriteHeader(std::ostream &os, std::string_view magic, uint32_t version) {
  os.write(magic.data(), static_cast<std::streamsize>(magic.size()));
  WriteU32(os, version);
}

void ExpectHeader(std::istream &is, std::string_view magic, uint32_t version) {
  std::string got(magic.size(), '\0');
  is.read(got.data(), static_cast<std::streamsize>(magic.size()));
  if (got != magic)
    throw DataError("bad magic: expected " + std::string(magic));
  uint32_t v = ReadU32(is);
  if (v != version)
    throw DataError("unsupported " + std::string(magic) + " version " +
                    std::to_string(v));
}

}  // namespace bin

double PairwiseSum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  size_t half = values.size() / 2;
  return PairwiseSum(values.first(half)) + PairwiseSum(values.subspan(half));
}

}  // namespace swlm
