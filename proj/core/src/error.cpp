#include "heston_deepcal/error.hpp"

namespace hdc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonPositiveStrike: return "NonPositiveStrike";
    case ErrorCode::NegativePrice: return "NegativePrice";
    case ErrorCode::DuplicateQuote: return "DuplicateQuote";
    case ErrorCode::EmptyChain: return "EmptyChain";
    case ErrorCode::InvalidQuote: return "InvalidQuote";
    case ErrorCode::InvalidMarketState: return "InvalidMarketState";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::TooFewQuotes: return "TooFewQuotes";
    case ErrorCode::ZeroFanIn: return "ZeroFanIn";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::StaleCache: return "StaleCache";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NumericalOverflow: return "NumericalOverflow";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::TooManyFailures: return "TooManyFailures";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::NumericalOverflow:
    case ErrorCode::QuadratureFailure:
    case ErrorCode::TooManyFailures:
      return ErrorCategory::Numerical;
    case ErrorCode::IoError:
    case ErrorCode::ParseError:
      return ErrorCategory::Io;
    default:
      return ErrorCategory::Validation;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace hdc
