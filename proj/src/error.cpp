#include "liesynth/error.hpp"

#include <sstream>

namespace liesynth {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NotClosedForm: return "NotClosedForm";
    case ErrorCode::PathTooShort: return "PathTooShort";
    case ErrorCode::NotSeparable: return "NotSeparable";
    case ErrorCode::FactorOnOwnNode: return "FactorOnOwnNode";
    case ErrorCode::NoPath: return "NoPath";
    case ErrorCode::NotStronglyConnected: return "NotStronglyConnected";
    case ErrorCode::UnsupportedDepth: return "UnsupportedDepth";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::Unrewritable: return "Unrewritable";
    case ErrorCode::NoKKTPoint: return "NoKKTPoint";
    case ErrorCode::MalformedProblem: return "MalformedProblem";
    case ErrorCode::VerificationFailed: return "VerificationFailed";
  }
  return "Unknown";
}

namespace {

std::string domain_message(int component, double value, const std::string& what) {
  std::ostringstream os;
  os << what << " (component " << (component >= 0 ? component + 1 : component)
     << ", argument " << value << ")";
  return os.str();
}

std::string divergence_message(double time) {
  std::ostringstream os;
  os << "state norm exceeded 1e8 at t=" << time;
  return os.str();
}

}  // namespace

DomainError::DomainError(int component, double value, const std::string& what)
    : Error(ErrorCode::DomainError, domain_message(component, value, what)),
      component_(component),
      value_(value) {}

DivergenceError::DivergenceError(double time)
    : Error(ErrorCode::Divergence, divergence_message(time)), time_(time) {}

}  // namespace liesynth
