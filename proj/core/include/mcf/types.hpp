#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcf {

// Largest ambient dimension handled (graphs D^2 -> R^3 live in R^5).
inline constexpr int kMaxAmbient = 6;
inline constexpr int kMaxIntrinsic = 2;

using AmbientVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxAmbient, 1>;
using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxIntrinsic, kMaxIntrinsic>;
using FrameMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbient, kMaxAmbient>;
using NormalVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxAmbient, 1>;

enum class ErrorKind {
  DegenerateMetric,
  FrameFailure,
  StepRejected,
  FlowStalled,
  IncomparableSnapshots,
  Unsupported,
  InsufficientData,
  FitDiverged,
  BadAnchor,
  GraphFold,
  HypothesisViolated,
  PreconditionUnsatisfied,
  RadiusTooLarge,
  ParseError,
  ValidationError,
  IoError,
  InvalidArgument,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mcf
