#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hdc {

// Every failure raised by the library carries one of these codes. The
// category decides the CLI exit status (2 validation, 3 numerical, 4 I/O).
enum class ErrorCode {
  // validation
  DomainError,
  MissingColumn,
  NonPositiveStrike,
  NegativePrice,
  DuplicateQuote,
  EmptyChain,
  InvalidQuote,
  InvalidMarketState,
  InvalidParams,
  InvalidConfig,
  TooFewQuotes,
  ZeroFanIn,
  ShapeMismatch,
  LengthMismatch,
  StaleCache,
  EmptyInput,
  // numerical
  NumericalOverflow,
  QuadratureFailure,
  TooManyFailures,
  // I/O
  IoError,
  ParseError,
};

enum class ErrorCategory { Validation, Numerical, Io };

std::string_view to_string(ErrorCode code);
ErrorCategory category_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace hdc
