#ifndef LICORM_ERROR_HPP
#define LICORM_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace licorm {

enum class ErrorCode {
  EmptyInput,
  NonFiniteValue,
  NegativeWeight,
  ZeroTotalWeight,
  NotNormalized,
  OutOfRange,
  InvalidOrder,
  InvalidParams,
  InvalidMixture,
  InvalidGeneratorSet,
  WrongMode,
  BadOptions,
  LengthMismatch,
  ParseError,
};

inline constexpr std::string_view to_string(ErrorCode code) noexcept
{
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::ZeroTotalWeight: return "ZeroTotalWeight";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InvalidOrder: return "InvalidOrder";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InvalidMixture: return "InvalidMixture";
    case ErrorCode::InvalidGeneratorSet: return "InvalidGeneratorSet";
    case ErrorCode::WrongMode: return "WrongMode";
    case ErrorCode::BadOptions: return "BadOptions";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Exception thrown by every fallible operation of the library.
class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string& what)
    : std::runtime_error(what), code_(code)
  {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorCode code, const std::string& what)
{
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const char* what)
{
  if (!cond) fail(code, what);
}

} // namespace detail
} // namespace licorm

#endif // LICORM_ERROR_HPP
