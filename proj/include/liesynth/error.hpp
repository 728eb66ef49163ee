#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace liesynth {

enum class ErrorCode {
  InvalidArgument,
  ParseError,
  DomainError,
  NotClosedForm,
  PathTooShort,
  NotSeparable,
  FactorOnOwnNode,
  NoPath,
  NotStronglyConnected,
  UnsupportedDepth,
  Divergence,
  Unrewritable,
  NoKKTPoint,
  MalformedProblem,
  VerificationFailed,
};

std::string_view to_string(ErrorCode code);

/// Base of every error thrown by the library. The code is stable and is what
/// the CLI prints after `ERROR `.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Evaluation hit a pole or left the domain of log. `component` is the
/// 0-based state index that drives the offending argument (-1 if unknown).
class DomainError : public Error {
 public:
  DomainError(int component, double value, const std::string& what);

  int component() const noexcept { return component_; }
  double value() const noexcept { return value_; }

 private:
  int component_;
  double value_;
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(double time);

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace liesynth
