#ifndef SWLM_ERROR_H_
#define SWLM_ERROR_H_

#include <stdexcept>
#include <string>

namespace swlm {

// Exit codes used by the command-line driver. Library errors carry one so
// the driver can map an exception to a status without inspecting messages.
enum class ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kData = 3,
  kNumerical = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string &what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

// Bad arguments or violated preconditions.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string &what) : Error(ExitCode::kUsage, what) {}
};

// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string &what) : Error(ExitCode::kData, what) {}
};

// Divergence, non-finite values, degenerate normalizers.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string &what)
      : Error(ExitCode::kNumerical, what) {}
};

}  // namespace swlm

#endif  // SWLM_ERROR_H_
