#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "sif/sif_filter.hpp"
#include "sif/state.hpp"

namespace sif {

/// Scaled sigma-point parameters. alpha in (0, 1]; the spread
/// lambda = alpha^2 * (n + kappa) - n must satisfy n + lambda > 0.
struct UkfParams {
  double alpha = 0.5;
  double beta = 2.0;
  double kappa = 0.0;
};

/// Central-difference Jacobian with step max(1e-6, 1e-6 * |x_i|) per
/// component.
Eigen::MatrixXd numeric_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)>& fn,
    const Eigen::VectorXd& x, int k);

// Linear Kalman filter.
GaussianState kf_predict(const GaussianState& state, const Eigen::MatrixXd& f,
                         const Eigen::MatrixXd& q);
UpdateResult kf_update(const GaussianState& predicted, const Eigen::VectorXd& z,
                       const Eigen::MatrixXd& h, const Eigen::MatrixXd& r);
GaussianState kf_step(const GaussianState& state, const Eigen::VectorXd& z,
                      const Eigen::MatrixXd& f, const Eigen::MatrixXd& h,
                      const Eigen::MatrixXd& q, const Eigen::MatrixXd& r);

// Extended Kalman filter; falls back to numeric Jacobians when the model
// carries none. Innovations are wrapped on angular components.
GaussianState ekf_predict(const GaussianState& state, const StateSpaceModel& model);
UpdateResult ekf_update(const GaussianState& predicted, const Eigen::VectorXd& z,
                        const StateSpaceModel& model);
GaussianState ekf_step(const GaussianState& state, const Eigen::VectorXd& z,
                       const StateSpaceModel& model);

// Unscented Kalman filter with scaled sigma points; fresh points are drawn
// from the predicted belief for the update.
GaussianState ukf_predict(const GaussianState& state, const StateSpaceModel& model,
                          const UkfParams& params);
UpdateResult ukf_update(const GaussianState& predicted, const Eigen::VectorXd& z,
                        const StateSpaceModel& model, const UkfParams& params);
GaussianState ukf_step(const GaussianState& state, const Eigen::VectorXd& z,
                       const StateSpaceModel& model, const UkfParams& params);

/// Classical fixed-interval smoother for a linear-Gaussian model; the oracle
/// the stochastic smoothers are validated against.
std::vector<GaussianState> rtss_smooth(const std::vector<GaussianState>& filtered,
                                       const Eigen::MatrixXd& f,
                                       const Eigen::MatrixXd& q);

}  // namespace sif
