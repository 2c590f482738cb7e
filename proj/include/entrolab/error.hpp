#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace entrolab {

enum class ErrorCode {
  // input validation
  BadWord,
  BadCellCount,
  BadPartition,
  BadDensity,
  BadFamily,
  DimensionMismatch,
  SizeMismatch,
  OutOfRange,
  DeltaTooLarge,
  NotSignValued,
  InvalidConfig,
  // declared infeasibility
  EmptySubshift,
  AllZero,
  Intractable,
  NetTooLarge,
  CapExceeded,
  Degenerate,
  NonConvergence,
};

std::string_view to_string(ErrorCode code);

/// True for codes that report an infeasible request rather than bad input.
bool is_infeasibility(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace entrolab
