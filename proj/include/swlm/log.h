#ifndef SWLM_LOG_H_
#define SWLM_LOG_H_

#include <initializer_list>
#include <string>
#include <utility>

namespace swlm {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3, kSilent = 4 };

// Structured diagnostics on stderr: "level=warn event=bow_degenerate ctx=...".
void SetLogLevel(LogLevel level);
LogLevel GetLogLevel();

void Log(LogLevel level, const std::string &event,
         std::initializer_list<std::pair<const char *, std::string>> fields = {});

}  // namespace swlm

#endif  // SWLM_LOG_H_
