#include "sif/baselines.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "sif/errors.hpp"
#include "sif/linalg.hpp"

namespace sif {

namespace {

Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& s, const Eigen::MatrixXd& rhs_t) {
  Eigen::LLT<Eigen::MatrixXd> llt(symmetrize(s));
  if (llt.info() != Eigen::Success) {
    throw InnovationCovSingular("innovation covariance is not invertible");
  }
  return llt.solve(rhs_t).transpose();  // returns rhs_t^T * s^-1
}

UpdateResult linear_update(const GaussianState& predicted, const Eigen::VectorXd& z,
                           const Eigen::VectorXd& z_hat, const Eigen::MatrixXd& s,
                           const Eigen::MatrixXd& cross,
                           const std::vector<int>& angular_dims) {
  const Eigen::MatrixXd gain = solve_spd(s, cross.transpose());
  const Eigen::VectorXd innovation = wrap_innovation(z - z_hat, angular_dims);

  UpdateResult result;
  result.filtered.mean = predicted.mean + gain * innovation;
  result.filtered.covariance =
      symmetrize(predicted.covariance - gain * s * gain.transpose());
  result.filtered.timestamp = predicted.timestamp;
  result.innovation = innovation;
  result.gain = gain;
  result.predicted_measurement = GaussianState{z_hat, s, predicted.timestamp};
  return result;
}

Eigen::MatrixXd transition_jacobian(const StateSpaceModel& model,
                                    const Eigen::VectorXd& x, int k) {
  if (model.transition_jacobian) return model.transition_jacobian(x, k);
  if (!model.transition) throw JacobianUnavailable("ekf: no transition function");
  return numeric_jacobian(model.transition, x, k);
}

Eigen::MatrixXd measurement_jacobian(const StateSpaceModel& model,
                                     const Eigen::VectorXd& x, int k) {
  if (model.measurement_jacobian) return model.measurement_jacobian(x, k);
  if (!model.measurement) throw JacobianUnavailable("ekf: no measurement function");
  return numeric_jacobian(model.measurement, x, k);
}

}  // namespace

Eigen::MatrixXd numeric_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)>& fn,
    const Eigen::VectorXd& x, int k) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd probe = x;
  Eigen::MatrixXd jac;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double step = std::max(1e-6, 1e-6 * std::abs(x(i)));
    probe(i) = x(i) + step;
    const Eigen::VectorXd hi = fn(probe, k);
    probe(i) = x(i) - step;
    const Eigen::VectorXd lo = fn(probe, k);
    probe(i) = x(i);
    if (jac.size() == 0) jac.resize(hi.size(), n);
    jac.col(i) = (hi - lo) / (2.0 * step);
  }
  return jac;
}

GaussianState kf_predict(const GaussianState& state, const Eigen::MatrixXd& f,
                         const Eigen::MatrixXd& q) {
  if (f.cols() != state.dim()) throw DimensionMismatch("kf_predict: F does not match state");
  GaussianState out;
  out.mean = f * state.mean;
  out.covariance = symmetrize(f * state.covariance * f.transpose() + q);
  out.timestamp = state.timestamp + 1;
  return out;
}

UpdateResult kf_update(const GaussianState& predicted, const Eigen::VectorXd& z,
                       const Eigen::MatrixXd& h, const Eigen::MatrixXd& r) {
  if (h.cols() != predicted.dim() || h.rows() != z.size()) {
    throw DimensionMismatch("kf_update: H does not match state and measurement");
  }
  const Eigen::MatrixXd s = symmetrize(h * predicted.covariance * h.transpose() + r);
  const Eigen::MatrixXd cross = predicted.covariance * h.transpose();
  return linear_update(predicted, z, h * predicted.mean, s, cross, {});
}

GaussianState kf_step(const GaussianState& state, const Eigen::VectorXd& z,
                      const Eigen::MatrixXd& f, const Eigen::MatrixXd& h,
                      const Eigen::MatrixXd& q, const Eigen::MatrixXd& r) {
  return kf_update(kf_predict(state, f, q), z, h, r).filtered;
}

GaussianState ekf_predict(const GaussianState& state, const StateSpaceModel& model) {
  if (!model.transition) throw JacobianUnavailable("ekf_predict: no transition function");
  const Eigen::MatrixXd f = transition_jacobian(model, state.mean, state.timestamp);
  GaussianState out;
  out.mean = model.transition(state.mean, state.timestamp);
  out.covariance = symmetrize(f * state.covariance * f.transpose() + model.process_noise);
  out.timestamp = state.timestamp + 1;
  return out;
}

UpdateResult ekf_update(const GaussianState& predicted, const Eigen::VectorXd& z,
                        const StateSpaceModel& model) {
  if (!model.measurement) throw JacobianUnavailable("ekf_update: no measurement function");
  const Eigen::MatrixXd h = measurement_jacobian(model, predicted.mean, predicted.timestamp);
  const Eigen::MatrixXd s =
      symmetrize(h * predicted.covariance * h.transpose() + model.measurement_noise);
  const Eigen::MatrixXd cross = predicted.covariance * h.transpose();
  return linear_update(predicted, z, model.measurement(predicted.mean, predicted.timestamp),
                       s, cross, model.angular_measurement_dims);
}

GaussianState ekf_step(const GaussianState& state, const Eigen::VectorXd& z,
                       const StateSpaceModel& model) {
  return ekf_update(ekf_predict(state, model), z, model).filtered;
}

namespace {

struct SigmaPoints {
  Eigen::MatrixXd points;       // n x (2n + 1), column 0 is the mean
  Eigen::VectorXd mean_weights;
  Eigen::VectorXd cov_weights;
};

SigmaPoints scaled_sigma_points(const GaussianState& state, const UkfParams& params) {
  const int n = state.dim();
  if (!(params.alpha > 0.0) || params.alpha > 1.0) {
    throw InvalidScaling("ukf: alpha must lie in (0, 1]");
  }
  const double lambda = params.alpha * params.alpha * (n + params.kappa) - n;
  const double spread = n + lambda;
  if (!(spread > 0.0)) {
    throw InvalidScaling("ukf: alpha/kappa give a nonpositive sigma-point spread");
  }
  const Eigen::MatrixXd scaled = std::sqrt(spread) * factor_psd(symmetrize(state.covariance));

  SigmaPoints sp;
  sp.points.resize(n, 2 * n + 1);
  sp.mean_weights.resize(2 * n + 1);
  sp.cov_weights.resize(2 * n + 1);
  sp.points.col(0) = state.mean;
  sp.mean_weights(0) = lambda / spread;
  sp.cov_weights(0) = lambda / spread + 1.0 - params.alpha * params.alpha + params.beta;
  for (int i = 0; i < n; ++i) {
    sp.points.col(1 + i) = state.mean + scaled.col(i);
    sp.points.col(1 + n + i) = state.mean - scaled.col(i);
    sp.mean_weights(1 + i) = sp.mean_weights(1 + n + i) = 0.5 / spread;
    sp.cov_weights(1 + i) = sp.cov_weights(1 + n + i) = 0.5 / spread;
  }
  return sp;
}

}  // namespace

GaussianState ukf_predict(const GaussianState& state, const StateSpaceModel& model,
                          const UkfParams& params) {
  if (!model.transition) throw std::invalid_argument("ukf_predict: no transition function");
  const SigmaPoints sp = scaled_sigma_points(state, params);
  const auto count = sp.points.cols();

  Eigen::MatrixXd propagated(state.dim(), count);
  for (Eigen::Index i = 0; i < count; ++i) {
    propagated.col(i) = model.transition(sp.points.col(i), state.timestamp);
  }
  GaussianState out;
  out.mean = propagated * sp.mean_weights;
  Eigen::MatrixXd cov = model.process_noise;
  for (Eigen::Index i = 0; i < count; ++i) {
    const Eigen::VectorXd d = propagated.col(i) - out.mean;
    cov.noalias() += sp.cov_weights(i) * (d * d.transpose());
  }
  out.covariance = symmetrize(cov);
  out.timestamp = state.timestamp + 1;
  return out;
}

UpdateResult ukf_update(const GaussianState& predicted, const Eigen::VectorXd& z,
                        const StateSpaceModel& model, const UkfParams& params) {
  if (!model.measurement) throw std::invalid_argument("ukf_update: no measurement function");
  const SigmaPoints sp = scaled_sigma_points(predicted, params);
  const auto count = sp.points.cols();

  // Sigma point 0 sits at the predicted mean; wrapping the other images onto
  // its branch keeps bearing averages meaningful near the +-pi cut.
  const auto h = measurement_about(
      model, model.measurement(predicted.mean, predicted.timestamp));
  Eigen::MatrixXd images(model.measurement_dim, count);
  for (Eigen::Index i = 0; i < count; ++i) {
    images.col(i) = h(sp.points.col(i), predicted.timestamp);
  }
  const Eigen::VectorXd z_hat = images * sp.mean_weights;
  Eigen::MatrixXd s = model.measurement_noise;
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(predicted.dim(), model.measurement_dim);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Eigen::VectorXd dz = images.col(i) - z_hat;
    const Eigen::VectorXd dx = sp.points.col(i) - predicted.mean;
    s.noalias() += sp.cov_weights(i) * (dz * dz.transpose());
    cross.noalias() += sp.cov_weights(i) * (dx * dz.transpose());
  }
  return linear_update(predicted, z, z_hat, symmetrize(s), cross,
                       model.angular_measurement_dims);
}

GaussianState ukf_step(const GaussianState& state, const Eigen::VectorXd& z,
                       const StateSpaceModel& model, const UkfParams& params) {
  return ukf_update(ukf_predict(state, model, params), z, model, params).filtered;
}

std::vector<GaussianState> rtss_smooth(const std::vector<GaussianState>& filtered,
                                       const Eigen::MatrixXd& f,
                                       const Eigen::MatrixXd& q) {
  if (filtered.empty()) throw EmptyInput("rtss_smooth: no filtered states");
  std::vector<GaussianState> smoothed(filtered.size());
  smoothed.back() = filtered.back();
  for (int m = static_cast<int>(filtered.size()) - 2; m >= 0; --m) {
    const GaussianState& cur = filtered[m];
    const Eigen::MatrixXd pred_cov = symmetrize(f * cur.covariance * f.transpose() + q);
    const Eigen::VectorXd pred_mean = f * cur.mean;
    const Eigen::MatrixXd cross = cur.covariance * f.transpose();

    Eigen::LLT<Eigen::MatrixXd> llt(pred_cov);
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefinite("rtss_smooth: predicted covariance is not invertible");
    }
    const Eigen::MatrixXd gain = llt.solve(cross.transpose()).transpose();

    smoothed[m].mean = cur.mean + gain * (smoothed[m + 1].mean - pred_mean);
    smoothed[m].covariance = symmetrize(
        cur.covariance -
        gain * (pred_cov - smoothed[m + 1].covariance) * gain.transpose());
    smoothed[m].timestamp = cur.timestamp;
  }
  return smoothed;
}

}  // namespace sif
