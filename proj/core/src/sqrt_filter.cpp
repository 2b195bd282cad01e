#include "sif/sqrt_filter.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "sif/errors.hpp"
#include "sif/linalg.hpp"

namespace sif {

namespace {

/// Stack the positively weighted columns of `dev` next to any extra blocks,
/// triangularize, then remove the negatively weighted columns as rank-one
/// downdates. Returns the lower-triangular factor of the signed Gram sum.
Eigen::MatrixXd factor_from_stack(const WeightedDeviationMatrix& dev,
                                  const std::vector<const Eigen::MatrixXd*>& extras) {
  const Eigen::Index d = dev.columns.rows();
  Eigen::Index pos = 0;
  for (Eigen::Index i = 0; i < dev.signs.size(); ++i) {
    if (dev.signs(i) > 0.0) ++pos;
  }
  Eigen::Index extra_cols = 0;
  for (const auto* e : extras) extra_cols += e->cols();

  Eigen::MatrixXd stacked(d, pos + extra_cols);
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < dev.signs.size(); ++i) {
    if (dev.signs(i) > 0.0) stacked.col(col++) = dev.columns.col(i);
  }
  for (const auto* e : extras) {
    stacked.middleCols(col, e->cols()) = *e;
    col += e->cols();
  }

  Eigen::MatrixXd factor = triangularize(stacked);
  for (Eigen::Index i = 0; i < dev.signs.size(); ++i) {
    if (dev.signs(i) < 0.0) cholesky_downdate(factor, dev.columns.col(i));
  }
  return factor;
}

/// Solve X * (F * F^T) = B for X with F lower-triangular, via two triangular
/// solves. Throws InnovationCovSingular when F has a negligible pivot.
Eigen::MatrixXd solve_against_factor(const Eigen::MatrixXd& f, const Eigen::MatrixXd& b) {
  const double top = f.diagonal().cwiseAbs().maxCoeff();
  if (!(top > 0.0) || f.diagonal().cwiseAbs().minCoeff() < 1e-14 * top) {
    throw InnovationCovSingular("square-root solve: factor is numerically singular");
  }
  const Eigen::MatrixXd y = f.triangularView<Eigen::Lower>().solve(b.transpose());
  return f.transpose().triangularView<Eigen::Upper>().solve(y).transpose();
}

struct SqrtStepData {
  SqrtGaussianState predicted;
  WeightedDeviationMatrix dev_points;
  WeightedDeviationMatrix dev_values;
  Eigen::MatrixXd noise_factor;
};

/// Shared kernel: run one integration pass of fn over N(mean, S*S^T), build
/// deviation matrices on the flattened point set, and assemble the factored
/// covariance including the additive noise factor.
SqrtStepData sqrt_moment_step(const SqrtGaussianState& state,
                              const std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)>& fn,
                              int out_dim, const Eigen::MatrixXd& noise,
                              const SirConfig& config, RngStream& rng) {
  Integrand g{out_dim, 1,
              [&fn, k = state.timestamp](const Eigen::VectorXd& x) { return fn(x, k); }};
  SirPassResult pass = run_sir_pass(state.mean, state.factor, {g}, config, rng, true);
  const SirPointSet flat = concatenate(pass.iterations);

  SqrtStepData data;
  data.dev_points = make_deviation_matrix(flat.points, state.mean, flat.weights);
  data.dev_values =
      make_deviation_matrix(pass.values[0], pass.estimates[0].value, flat.weights);
  data.noise_factor = factor_psd(noise);
  data.predicted.mean = pass.estimates[0].value;
  data.predicted.factor = factor_from_stack(data.dev_values, {&data.noise_factor});
  data.predicted.timestamp = state.timestamp;
  return data;
}

}  // namespace

Eigen::MatrixXd WeightedDeviationMatrix::signed_product(
    const WeightedDeviationMatrix& other) const {
  if (columns.cols() != other.columns.cols() || signs.size() != other.signs.size()) {
    throw DimensionMismatch("signed_product: operand column counts differ");
  }
  if ((signs - other.signs).cwiseAbs().maxCoeff() != 0.0) {
    throw DimensionMismatch("signed_product: operands use different weight signs");
  }
  return columns * signs.asDiagonal() * other.columns.transpose();
}

WeightedDeviationMatrix make_deviation_matrix(const Eigen::MatrixXd& values,
                                              const Eigen::VectorXd& center,
                                              const Eigen::VectorXd& weights) {
  if (values.rows() != center.size() || values.cols() != weights.size()) {
    throw DimensionMismatch("make_deviation_matrix: shapes do not line up");
  }
  WeightedDeviationMatrix dev;
  dev.columns.resize(values.rows(), values.cols());
  dev.signs.resize(weights.size());
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    dev.signs(i) = weights(i) < 0.0 ? -1.0 : 1.0;
    dev.columns.col(i) = std::sqrt(std::abs(weights(i))) * (values.col(i) - center);
  }
  return dev;
}

SqrtPredictionResult predict_sqrt(const SqrtGaussianState& state,
                                  const StateSpaceModel& model, int steps,
                                  const SirConfig& config, RngStream& rng,
                                  bool want_forward_data) {
  if (steps < 1) throw std::invalid_argument("predict_sqrt: steps must be >= 1");
  if (!model.transition) throw std::invalid_argument("predict_sqrt: model has no transition");
  if (model.process_noise.rows() != state.dim() ||
      model.process_noise.cols() != state.dim()) {
    throw DimensionMismatch("predict_sqrt: process noise does not match state dimension");
  }

  SqrtGaussianState current = state;
  SqrtPredictionResult result;
  for (int s = 0; s < steps; ++s) {
    SqrtStepData data = sqrt_moment_step(current, model.transition, state.dim(),
                                         model.process_noise, config, rng);
    data.predicted.timestamp = current.timestamp + 1;
    if (want_forward_data) {
      result.cross_cov = data.dev_points.signed_product(data.dev_values);
      SqrtSmootherStep fw;
      fw.filtered = current;
      fw.predicted = data.predicted;
      fw.dev_filtered = std::move(data.dev_points);
      fw.dev_transformed = std::move(data.dev_values);
      fw.process_noise_factor = std::move(data.noise_factor);
      result.forward = std::move(fw);
    }
    current = std::move(data.predicted);
  }
  result.predicted = std::move(current);
  return result;
}

SqrtUpdateResult update_sqrt(const SqrtGaussianState& predicted,
                             const Eigen::VectorXd& measurement,
                             const StateSpaceModel& model, const SirConfig& config,
                             RngStream& rng) {
  if (!model.measurement) throw std::invalid_argument("update_sqrt: model has no measurement");
  const int n_z = model.measurement_dim;
  if (measurement.size() != n_z) {
    throw DimensionMismatch("update_sqrt: measurement size does not match model");
  }
  if (model.measurement_noise.rows() != n_z || model.measurement_noise.cols() != n_z) {
    throw DimensionMismatch("update_sqrt: measurement noise does not match model");
  }

  const auto h = measurement_about(
      model, model.measurement(predicted.mean, predicted.timestamp));
  SqrtStepData data =
      sqrt_moment_step(predicted, h, n_z, model.measurement_noise, config, rng);
  const WeightedDeviationMatrix& dev_x = data.dev_points;
  const WeightedDeviationMatrix& dev_z = data.dev_values;
  const Eigen::MatrixXd& innovation_factor = data.predicted.factor;

  const Eigen::MatrixXd cross = dev_x.signed_product(dev_z);
  const Eigen::MatrixXd gain = solve_against_factor(innovation_factor, cross);

  const Eigen::VectorXd innovation =
      wrap_innovation(measurement - data.predicted.mean, model.angular_measurement_dims);

  // Corrected deviation columns share the weight magnitudes of the originals,
  // so the signed stacking and downdating still applies.
  WeightedDeviationMatrix corrected;
  corrected.columns = dev_x.columns - gain * dev_z.columns;
  corrected.signs = dev_x.signs;
  const Eigen::MatrixXd gain_noise = gain * data.noise_factor;

  SqrtUpdateResult result;
  result.filtered.mean = predicted.mean + gain * innovation;
  result.filtered.factor = factor_from_stack(corrected, {&gain_noise});
  result.filtered.timestamp = predicted.timestamp;
  result.innovation = innovation;
  result.gain = gain;
  result.predicted_measurement = data.predicted.mean;
  result.innovation_factor = innovation_factor;
  return result;
}

std::vector<SqrtGaussianState> smooth_sqrt(const std::vector<SqrtSmootherStep>& forward,
                                           const SqrtGaussianState& last_filtered) {
  if (forward.empty()) throw MissingForwardData("smooth_sqrt: no forward steps stored");
  for (const auto& step : forward) {
    if (step.dev_filtered.columns.size() == 0 || step.dev_transformed.columns.size() == 0) {
      throw MissingForwardData("smooth_sqrt: a forward step has empty deviation data");
    }
  }

  std::vector<SqrtGaussianState> smoothed(forward.size() + 1);
  smoothed.back() = last_filtered;

  for (int m = static_cast<int>(forward.size()) - 1; m >= 0; --m) {
    const SqrtSmootherStep& st = forward[m];
    const Eigen::MatrixXd cross = st.dev_filtered.signed_product(st.dev_transformed);
    const Eigen::MatrixXd gain = solve_against_factor(st.predicted.factor, cross);

    WeightedDeviationMatrix corrected;
    corrected.columns = st.dev_filtered.columns - gain * st.dev_transformed.columns;
    corrected.signs = st.dev_filtered.signs;
    const Eigen::MatrixXd gain_noise = gain * st.process_noise_factor;
    const Eigen::MatrixXd gain_next = gain * smoothed[m + 1].factor;

    SqrtGaussianState s;
    s.mean = st.filtered.mean + gain * (smoothed[m + 1].mean - st.predicted.mean);
    s.factor = factor_from_stack(corrected, {&gain_noise, &gain_next});
    s.timestamp = st.filtered.timestamp;
    smoothed[m] = std::move(s);
  }
  return smoothed;
}

SqrtSmootherStep regenerate_forward_step(const SqrtGaussianState& filtered,
                                         const StateSpaceModel& model,
                                         const SirConfig& config,
                                         RngStream rng_at_predict) {
  SqrtPredictionResult res = predict_sqrt(filtered, model, 1, config, rng_at_predict, true);
  return std::move(*res.forward);
}

}  // namespace sif
