#include "swlm/log.h"

#include <atomic>
#include <iostream>
#include <mutex>
#include <sstream>

namespace swlm {

namespace {
std::atomic<LogLevel> g_level{LogLevel::kWarn};
std::mutex g_mutex;

const char *LevelName(LogLevel level) {
  switch (level) {
    case LogLevel::kDebug: return "debug";
    case LogLevel::kInfo: return "info";
    case LogLevel::kWarn: return "warn";
    case LogLevel::kError: return "error";
    default: return "silent";
  }
}
}  // namespace

void SetLogLevel(LogLevel level) { g_level = level; }
LogLevel GetLogLevel() { return g_level; }

void Log(LogLevel level, const std::string &event,
         std::initializer_list<std::pair<const char *, std::string>> fields) {
  if (level < g_level.load()) return;
  std::ostringstream line;
  line << "level=" << LevelName(level) << " event=" << event;
  for (const auto &[k, v] : fields) {
    line << ' ' << k << '=';
    if (v.find(' ') != std::string::npos) line << '"' << v << '"';
    else line << v;
  }
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << line.str() << '\n';
}

}  // namespace swlm
