#pragma once

#include <stdexcept>
#include <string>

namespace spa {

enum class ErrorCode {
  ClusterAmbiguity,
  PoleOnContour,
  ZeroSeparationFailure,
  BranchViolation,
  SingularFiber,
  OrderExceeded,
  DepthUnavailable,
  NotElliptic,
  LambdaOnSpectrum,
  EigenvalueOnCut,
  ClearanceFailure,
  DepthInsufficient,
  NotSelfadjoint,
  UnsupportedDimension,
  HeatCoefficientUnavailable,
  SchemaError,
  ComputationError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::ClusterAmbiguity: return "ClusterAmbiguity";
    case ErrorCode::PoleOnContour: return "PoleOnContour";
    case ErrorCode::ZeroSeparationFailure: return "ZeroSeparationFailure";
    case ErrorCode::BranchViolation: return "BranchViolation";
    case ErrorCode::SingularFiber: return "SingularFiber";
    case ErrorCode::OrderExceeded: return "OrderExceeded";
    case ErrorCode::DepthUnavailable: return "DepthUnavailable";
    case ErrorCode::NotElliptic: return "NotElliptic";
    case ErrorCode::LambdaOnSpectrum: return "LambdaOnSpectrum";
    case ErrorCode::EigenvalueOnCut: return "EigenvalueOnCut";
    case ErrorCode::ClearanceFailure: return "ClearanceFailure";
    case ErrorCode::DepthInsufficient: return "DepthInsufficient";
    case ErrorCode::NotSelfadjoint: return "NotSelfadjoint";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::HeatCoefficientUnavailable: return "HeatCoefficientUnavailable";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ComputationError: return "ComputationError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace spa
