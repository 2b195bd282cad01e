#include "sif/scenario.hpp"

#include <atomic>
#include <cmath>

#include "sif/errors.hpp"
#include "sif/linalg.hpp"

namespace sif {

namespace {

std::atomic<std::uint64_t> g_range_clamps{0};

Eigen::VectorXd sample_gaussian(const Eigen::VectorXd& mean,
                                const Eigen::MatrixXd& factor, RngStream& rng) {
  Eigen::VectorXd draw(mean.size());
  for (Eigen::Index i = 0; i < draw.size(); ++i) draw(i) = rng.normal();
  return mean + factor * draw;
}

}  // namespace

Eigen::Matrix4d scenario_transition_matrix(const ScenarioConfig& config) {
  const double t = config.t_step;
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 1) = t;
  f(2, 3) = t;
  return f;
}

Eigen::Matrix4d scenario_process_noise(const ScenarioConfig& config) {
  const double t = config.t_step;
  Eigen::Matrix2d block;
  block << t * t * t / 3.0, t * t / 2.0, t * t / 2.0, t;
  Eigen::Matrix4d q = Eigen::Matrix4d::Zero();
  q.topLeftCorner<2, 2>() = config.q1 * block;
  q.bottomRightCorner<2, 2>() = config.q2 * block;
  return q;
}

Eigen::MatrixXd scenario_measurement_noise(const ScenarioConfig& config) {
  if (config.linear_measurement) {
    return Eigen::MatrixXd::Identity(4, 4);
  }
  Eigen::Matrix2d r = Eigen::Matrix2d::Zero();
  r(0, 0) = config.bearing_variance;
  r(1, 1) = config.range_variance;
  return r;
}

std::uint64_t range_clamp_count() noexcept {
  return g_range_clamps.load(std::memory_order_relaxed);
}

void reset_range_clamp_count() noexcept {
  g_range_clamps.store(0, std::memory_order_relaxed);
}

StateSpaceModel make_scenario_model(const ScenarioConfig& config) {
  StateSpaceModel model;
  model.state_dim = 4;
  model.process_noise = scenario_process_noise(config);
  model.measurement_noise = scenario_measurement_noise(config);

  const Eigen::Matrix4d f = scenario_transition_matrix(config);
  model.transition = [f](const Eigen::VectorXd& x, int) -> Eigen::VectorXd {
    return f * x;
  };
  model.transition_jacobian = [f](const Eigen::VectorXd&, int) -> Eigen::MatrixXd {
    return f;
  };

  if (config.linear_measurement) {
    model.measurement_dim = 4;
    model.measurement = [](const Eigen::VectorXd& x, int) -> Eigen::VectorXd {
      return x;
    };
    model.measurement_jacobian = [](const Eigen::VectorXd& x, int) -> Eigen::MatrixXd {
      return Eigen::MatrixXd::Identity(x.size(), x.size());
    };
    return model;
  }

  const Eigen::Vector2d radar = config.radar_position;
  model.measurement_dim = 2;
  model.angular_measurement_dims = {0};
  model.measurement = [radar](const Eigen::VectorXd& x, int) -> Eigen::VectorXd {
    const double dx = x(0) - radar(0);
    const double dy = x(2) - radar(1);
    Eigen::Vector2d z;
    z(0) = std::atan2(dy, dx);
    z(1) = std::sqrt(dx * dx + dy * dy);
    return z;
  };
  model.measurement_jacobian = [radar](const Eigen::VectorXd& x, int) -> Eigen::MatrixXd {
    const double dx = x(0) - radar(0);
    const double dy = x(2) - radar(1);
    double range = std::sqrt(dx * dx + dy * dy);
    if (range < 1e-9) {
      range = 1e-9;
      g_range_clamps.fetch_add(1, std::memory_order_relaxed);
    }
    const double range2 = range * range;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2, 4);
    jac(0, 0) = -dy / range2;
    jac(0, 2) = dx / range2;
    jac(1, 0) = dx / range;
    jac(1, 2) = dy / range;
    return jac;
  };
  return model;
}

TrackRecord simulate_truth(const ScenarioConfig& config, RngStream& rng) {
  if (config.horizon < 1) throw std::invalid_argument("simulate_truth: horizon must be >= 1");
  const StateSpaceModel model = make_scenario_model(config);
  const Eigen::MatrixXd q_factor = factor_psd(model.process_noise);
  const Eigen::MatrixXd r_factor = factor_psd(model.measurement_noise);
  const Eigen::MatrixXd p0_factor =
      Eigen::MatrixXd(config.initial_variances.cwiseSqrt().asDiagonal());

  TrackRecord track;
  track.truth.reserve(config.horizon + 1);
  track.measurements.reserve(config.horizon + 1);

  Eigen::VectorXd x = sample_gaussian(config.initial_mean, p0_factor, rng);
  for (int k = 0; k <= config.horizon; ++k) {
    if (k > 0) x = sample_gaussian(model.transition(x, k - 1), q_factor, rng);
    track.truth.push_back(x);
    track.measurements.push_back(
        sample_gaussian(model.measurement(x, k), r_factor, rng));
  }
  return track;
}

GaussianState scenario_prior(const ScenarioConfig& config) {
  GaussianState prior;
  prior.mean = config.initial_mean;
  prior.covariance = Eigen::MatrixXd(config.initial_variances.asDiagonal());
  prior.timestamp = 0;
  return prior;
}

}  // namespace sif
