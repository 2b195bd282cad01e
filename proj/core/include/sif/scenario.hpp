#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "sif/rng.hpp"
#include "sif/state.hpp"

namespace sif {

/// Bearing-range radar tracking scenario: a nearly constant-velocity target in
/// the plane, state [x position, x velocity, y position, y velocity], observed
/// by a fixed radar through bearing and range. Defaults describe a target
/// passing very close to the radar, which makes the measurement strongly
/// nonlinear early in the track.
struct ScenarioConfig {
  double t_step = 1.0;
  int horizon = 20;  // time indices k = 0..horizon
  double q1 = 0.05;  // white acceleration intensity, x axis
  double q2 = 0.05;  // y axis
  double bearing_variance = 0.2 * M_PI / 180.0;  // rad^2
  double range_variance = 1.0;
  Eigen::Vector2d radar_position{50.0, 0.0};
  Eigen::Vector4d initial_mean{50.0, 1.0, 1.0, 1.0};
  Eigen::Vector4d initial_variances{1.5, 0.5, 1.5, 0.5};
  /// Replace the radar with a full-state identity measurement (unit noise on
  /// each component); used for exact linear-Gaussian consistency checks.
  bool linear_measurement = false;

  int mc_runs = 10000;
  std::uint64_t seed = 0;
  /// Divide time-averaged metrics by horizon (the transition count) instead
  /// of horizon + 1 (the number of scored time indices).
  bool normalize_by_horizon = false;
};

Eigen::Matrix4d scenario_transition_matrix(const ScenarioConfig& config);
Eigen::Matrix4d scenario_process_noise(const ScenarioConfig& config);
Eigen::MatrixXd scenario_measurement_noise(const ScenarioConfig& config);

/// Assemble the state-space model, including analytic Jacobians. The bearing
/// Jacobian clamps the range at 1e-9 to stay finite at the radar position;
/// range_clamp_count() reports how often that happened.
StateSpaceModel make_scenario_model(const ScenarioConfig& config);

std::uint64_t range_clamp_count() noexcept;
void reset_range_clamp_count() noexcept;

/// One simulated trajectory with measurements at every time index. The
/// initial state is drawn from the initial Gaussian.
struct TrackRecord {
  std::vector<Eigen::VectorXd> truth;         // horizon + 1 states
  std::vector<Eigen::VectorXd> measurements;  // horizon + 1 measurements
};

TrackRecord simulate_truth(const ScenarioConfig& config, RngStream& rng);

/// The prior belief the filters start from.
GaussianState scenario_prior(const ScenarioConfig& config);

}  // namespace sif
