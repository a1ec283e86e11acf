#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace probec {

enum class ErrorCode {
  Parse = 1,
  InvalidProbability,
  DuplicateFact,
  UnboundHeadVariable,
  UnsafeVariable,
  CyclicFluentDependency,
  UnknownFluent,
  TooManyVars,
  VarNotInOrder,
  NotCrisp,
  InvalidArgument,
  Io,
};

const char* to_string(ErrorCode code);

// Every failure in the core library is reported with one of these. Line and
// column are 1-based and zero when the error has no source position.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::size_t line = 0,
        std::size_t column = 0);

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  ErrorCode code_;
  std::size_t line_;
  std::size_t column_;
};

}  // namespace probec
