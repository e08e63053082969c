#pragma once

#include <stdexcept>
#include <string>

namespace vcqr {

//! Structured error categories raised across the library.
enum class ErrorCode {
  InvalidArgument,
  MismatchedLengths,
  InvalidBandwidth,
  InsufficientLocalData,
  ExtrapolationRefused,
  InvalidProblem,
  OracleTooLarge,
  DegenerateDensity,
  GridMismatch,
  NotPositiveSemidefinite,
  DegenerateColumn,
  ParseError,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
    : std::runtime_error(what)
    , code_(code)
  {
  }

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace vcqr
