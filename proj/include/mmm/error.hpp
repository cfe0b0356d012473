#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmm {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  ShapeMismatch,
  NonFiniteInput,
  EmptyBlock,
  MissingBlock,
  DegenerateColumn,
  ZeroNormColumn,
  IndexOutOfRange,
  SingularGram,
  UnnormalizedDirection,
  EmptySupport,
  ZeroTruthNorm,
  BlockOutOfRange,
  TooManyFailures,
  GridEmpty,
  TooFewRows,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. Every failure carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Same code, message prefixed with context (stage label, column index, ...).
  Error with_context(const std::string& context) const {
    Error e(*this);
    static_cast<std::runtime_error&>(e) = std::runtime_error(context + ": " + what());
    return e;
  }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::EmptyBlock: return "EmptyBlock";
    case ErrorCode::MissingBlock: return "MissingBlock";
    case ErrorCode::DegenerateColumn: return "DegenerateColumn";
    case ErrorCode::ZeroNormColumn: return "ZeroNormColumn";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::UnnormalizedDirection: return "UnnormalizedDirection";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::ZeroTruthNorm: return "ZeroTruthNorm";
    case ErrorCode::BlockOutOfRange: return "BlockOutOfRange";
    case ErrorCode::TooManyFailures: return "TooManyFailures";
    case ErrorCode::GridEmpty: return "GridEmpty";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace mmm
