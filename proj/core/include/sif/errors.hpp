#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace sif {

/// Base class for all failures raised by the estimation library.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix expected to be symmetric positive definite failed factorization.
class NotPositiveDefinite : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// Operands have incompatible dimensions.
class DimensionMismatch : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// An integrand threw or returned an output of the wrong size.
/// Carries the evaluation point that triggered the failure.
class IntegrandFailure : public EstimationError {
 public:
  IntegrandFailure(const std::string& what, Eigen::VectorXd point)
      : EstimationError(what), point_(std::move(point)) {}

  const Eigen::VectorXd& point() const noexcept { return point_; }

 private:
  Eigen::VectorXd point_;
};

/// The innovation covariance could not be solved against.
class InnovationCovSingular : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// A rank-one downdate would make a triangular factor indefinite.
class DowndateFailure : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// Smoothing requested but the forward pass did not store a cross-covariance.
class MissingCrossCov : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// Square-root smoothing requested without stored forward-pass data.
class MissingForwardData : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// An operation received an empty input sequence.
class EmptyInput : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// Sigma-point scaling parameters produce a degenerate spread.
class InvalidScaling : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// No analytic Jacobian is set and numeric differentiation is impossible.
class JacobianUnavailable : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// A run configuration file could not be parsed.
class ConfigParseError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// An output artifact could not be written.
class IoError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

}  // namespace sif
