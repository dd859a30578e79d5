#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace storeplan {

enum class ErrorCode {
  kInvalidInput,
  kDimensionMismatch,
  kInfeasible,
  kUnbounded,
  kNumericalFailure,
  kIndivisibleHorizon,
  kKTooLarge,
  kEmptyCluster,
  kNotOptimal,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure surfaced by the library is an Error carrying a code, so
// callers (the CLI in particular) can map failures to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace storeplan
