#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace sif {

/// Gaussian belief over a state vector at a discrete time index.
struct GaussianState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // symmetric positive definite
  int timestamp = 0;

  int dim() const { return static_cast<int>(mean.size()); }
};

/// Gaussian belief carried in square-root form: covariance = factor * factor^T
/// with factor square lower-triangular, nonnegative diagonal.
struct SqrtGaussianState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd factor;
  int timestamp = 0;

  int dim() const { return static_cast<int>(mean.size()); }
  GaussianState to_gaussian() const;
  static SqrtGaussianState from_gaussian(const GaussianState& state);
};

/// Discrete-time state-space model
///   x_{k+1} = f(x_k, k) + w_k,   w_k ~ N(0, Q)
///   z_k     = h(x_k, k) + v_k,   v_k ~ N(0, R)
/// Jacobian callbacks are optional; estimators that need them fall back to
/// central-difference differentiation when they are unset.
struct StateSpaceModel {
  int state_dim = 0;
  int measurement_dim = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)> transition;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)> measurement;
  Eigen::MatrixXd process_noise;      // Q
  Eigen::MatrixXd measurement_noise;  // R
  std::vector<int> angular_measurement_dims;  // components wrapped to (-pi, pi]
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, int)> transition_jacobian;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, int)> measurement_jacobian;
};

/// Wrap an angle to the interval (-pi, pi].
double wrap_angle(double theta);

/// Wrap the listed components of an innovation vector to (-pi, pi].
Eigen::VectorXd wrap_innovation(Eigen::VectorXd innovation,
                                const std::vector<int>& angular_dims);

/// Measurement function whose angular components are moved onto the branch
/// within pi of `reference` (typically the evaluation at the density mean).
/// Weighted means and covariances of bearings are then immune to the cut at
/// +-pi; without this, points straddling the cut average to garbage. Returns
/// model.measurement unchanged when no angular components are declared.
std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)> measurement_about(
    const StateSpaceModel& model, const Eigen::VectorXd& reference);

}  // namespace sif
