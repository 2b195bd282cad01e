#include "sif/sif_filter.hpp"

#include <Eigen/Dense>

#include "sif/errors.hpp"
#include "sif/linalg.hpp"

namespace sif {

namespace {

Integrand vector_integrand(const std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)>& fn,
                           int rows, int k) {
  return Integrand{rows, 1, [&fn, k](const Eigen::VectorXd& x) { return fn(x, k); }};
}

Integrand outer_integrand(const std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)>& fn,
                          int rows, int k) {
  return Integrand{rows, rows, [&fn, k, rows](const Eigen::VectorXd& x) {
                     const Eigen::VectorXd v = fn(x, k);
                     Eigen::MatrixXd outer = v * v.transpose();
                     return Eigen::VectorXd(
                         Eigen::Map<Eigen::VectorXd>(outer.data(), rows * rows));
                   }};
}

Integrand cross_integrand(const std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)>& fn,
                          int state_rows, int rows, int k) {
  return Integrand{state_rows, rows, [&fn, k, state_rows, rows](const Eigen::VectorXd& x) {
                     const Eigen::VectorXd v = fn(x, k);
                     Eigen::MatrixXd cross = x * v.transpose();
                     return Eigen::VectorXd(
                         Eigen::Map<Eigen::VectorXd>(cross.data(), state_rows * rows));
                   }};
}

struct CentralMoments {
  Eigen::VectorXd mean;           // E[g]
  Eigen::MatrixXd covariance;     // E[(g - mean)(g - mean)^T], noise-free
  Eigen::MatrixXd cross;          // E[(x - x_mean)(g - mean)^T]
  Eigen::MatrixXd mean_error_cov; // spread estimate of `mean`
  int iterations = 0;
};

/// Recursive estimate of a central-moment integrand evaluated on a stored
/// point stream (used by the dedicated moment path).
template <typename PerIteration>
Eigen::MatrixXd replay_recursion(const SirPassResult& pass, Eigen::Index rows,
                                 Eigen::Index cols, PerIteration&& frak_of) {
  Eigen::MatrixXd i_hat = Eigen::MatrixXd::Zero(rows, cols);
  const int total = static_cast<int>(pass.iterations.size());
  for (int n = 0; n < total; ++n) {
    const Eigen::MatrixXd frak = frak_of(n);
    i_hat += (frak - i_hat) / static_cast<double>(n + 1);
  }
  return i_hat;
}

/// One pass computing mean, central covariance and cross-covariance of g(x, k)
/// under N(mean, factor*factor^T), on a single shared point stream.
CentralMoments gaussian_moments(const Eigen::VectorXd& mean, const Eigen::MatrixXd& factor,
                                const std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)>& fn,
                                int out_dim, int k, const SirConfig& config, RngStream& rng,
                                MomentPath path, bool want_cross) {
  const int n_x = static_cast<int>(mean.size());
  CentralMoments out;

  if (path == MomentPath::Raw) {
    std::vector<Integrand> batch;
    batch.push_back(vector_integrand(fn, out_dim, k));
    batch.push_back(outer_integrand(fn, out_dim, k));
    if (want_cross) batch.push_back(cross_integrand(fn, n_x, out_dim, k));
    SirPassResult pass = run_sir_pass(mean, factor, batch, config, rng, false);

    out.mean = pass.estimates[0].value;
    out.mean_error_cov = pass.estimates[0].error_cov;
    out.iterations = pass.estimates[0].iterations;
    const Eigen::MatrixXd raw_outer = pass.estimates[1].value_matrix();
    out.covariance = symmetrize(raw_outer - out.mean * out.mean.transpose());
    if (want_cross) {
      const Eigen::MatrixXd raw_cross = pass.estimates[2].value_matrix();
      out.cross = raw_cross - mean * out.mean.transpose();
    }
    return out;
  }

  // Dedicated path: keep the stream's points and values, then rerun the
  // recursions on deviations about the freshly estimated mean.
  SirPassResult pass =
      run_sir_pass(mean, factor, {vector_integrand(fn, out_dim, k)}, config, rng, true);
  out.mean = pass.estimates[0].value;
  out.mean_error_cov = pass.estimates[0].error_cov;
  out.iterations = pass.estimates[0].iterations;

  const Eigen::VectorXd& g_mean = out.mean;
  const Eigen::MatrixXd& values = pass.values[0];
  const int side = 2 * n_x;

  out.covariance = symmetrize(replay_recursion(
      pass, out_dim, out_dim, [&](int n) {
        const auto& it = pass.iterations[n];
        const Eigen::VectorXd dc = values.col(0) - g_mean;
        Eigen::MatrixXd frak = it.weights(0) * (dc * dc.transpose());
        for (int j = 0; j < side; ++j) {
          const Eigen::VectorXd d = values.col(1 + n * side + j) - g_mean;
          frak.noalias() += it.weights(1 + j) * (d * d.transpose());
        }
        return frak;
      }));
  if (want_cross) {
    out.cross = replay_recursion(
        pass, n_x, out_dim, [&](int n) {
          const auto& it = pass.iterations[n];
          // The central point equals the density mean, so its deviation is zero.
          Eigen::MatrixXd frak = Eigen::MatrixXd::Zero(n_x, out_dim);
          for (int j = 0; j < side; ++j) {
            const Eigen::VectorXd dx = it.points.col(1 + j) - mean;
            const Eigen::VectorXd dg = values.col(1 + n * side + j) - g_mean;
            frak.noalias() += it.weights(1 + j) * (dx * dg.transpose());
          }
          return frak;
        });
  }
  return out;
}

}  // namespace

PredictionResult predict(const GaussianState& state, const StateSpaceModel& model,
                         int steps, const SirConfig& config, RngStream& rng,
                         bool want_cross_cov, const SifOptions& options) {
  if (steps < 1) throw std::invalid_argument("predict: steps must be >= 1");
  if (!model.transition) throw std::invalid_argument("predict: model has no transition");
  if (model.process_noise.rows() != state.dim() ||
      model.process_noise.cols() != state.dim()) {
    throw DimensionMismatch("predict: process noise does not match state dimension");
  }

  GaussianState current = state;
  PredictionResult result;
  for (int s = 0; s < steps; ++s) {
    const Eigen::MatrixXd factor = factor_psd(symmetrize(current.covariance));
    const CentralMoments mom =
        gaussian_moments(current.mean, factor, model.transition, state.dim(),
                         current.timestamp, config, rng, options.moment_path,
                         want_cross_cov);
    GaussianState next;
    next.mean = mom.mean;
    next.covariance = symmetrize(mom.covariance + model.process_noise);
    next.timestamp = current.timestamp + 1;
    if (want_cross_cov) result.cross_cov = mom.cross;
    current = std::move(next);
  }
  result.predicted = std::move(current);
  return result;
}

UpdateResult update(const GaussianState& predicted, const Eigen::VectorXd& measurement,
                    const StateSpaceModel& model, const SirConfig& config,
                    RngStream& rng, const SifOptions& options) {
  if (!model.measurement) throw std::invalid_argument("update: model has no measurement");
  const int n_z = model.measurement_dim;
  if (measurement.size() != n_z) {
    throw DimensionMismatch("update: measurement size does not match model");
  }
  if (model.measurement_noise.rows() != n_z || model.measurement_noise.cols() != n_z) {
    throw DimensionMismatch("update: measurement noise does not match model");
  }

  const Eigen::MatrixXd factor = factor_psd(symmetrize(predicted.covariance));
  const auto h = measurement_about(
      model, model.measurement(predicted.mean, predicted.timestamp));
  const CentralMoments mom =
      gaussian_moments(predicted.mean, factor, h, n_z,
                       predicted.timestamp, config, rng, options.moment_path, true);

  Eigen::MatrixXd innovation_cov = mom.covariance + model.measurement_noise;
  if (options.inflate_mean_error) innovation_cov += mom.mean_error_cov;
  innovation_cov = symmetrize(innovation_cov);

  Eigen::LLT<Eigen::MatrixXd> llt(innovation_cov);
  if (llt.info() != Eigen::Success) {
    throw InnovationCovSingular("update: innovation covariance is not invertible");
  }
  // K = P^xz (P^zz)^-1 without forming the inverse.
  const Eigen::MatrixXd gain = llt.solve(mom.cross.transpose()).transpose();

  const Eigen::VectorXd innovation =
      wrap_innovation(measurement - mom.mean, model.angular_measurement_dims);

  UpdateResult result;
  result.filtered.mean = predicted.mean + gain * innovation;
  result.filtered.covariance =
      symmetrize(predicted.covariance - gain * innovation_cov * gain.transpose());
  result.filtered.timestamp = predicted.timestamp;
  result.innovation = innovation;
  result.gain = gain;
  result.predicted_measurement = GaussianState{mom.mean, innovation_cov, predicted.timestamp};
  return result;
}

namespace {

std::vector<GaussianState> smooth_impl(const std::vector<GaussianState>& filtered,
                                       const std::vector<PredictionResult>& predictions,
                                       const StateSpaceModel& model,
                                       const SirConfig* config, RngStream* rng) {
  if (filtered.empty()) throw EmptyInput("smooth: no filtered states");
  if (predictions.size() + 1 != filtered.size()) {
    throw DimensionMismatch("smooth: need one prediction per transition");
  }

  std::vector<GaussianState> smoothed(filtered.size());
  smoothed.back() = filtered.back();

  for (int m = static_cast<int>(predictions.size()) - 1; m >= 0; --m) {
    const GaussianState& f = filtered[m];
    const GaussianState& p = predictions[m].predicted;

    Eigen::MatrixXd cross;
    if (predictions[m].cross_cov) {
      cross = *predictions[m].cross_cov;
    } else if (config && rng) {
      // Fresh pass over the filtering density; deviations are taken about the
      // stored forward means so the gain stays consistent with them.
      const Eigen::MatrixXd factor = factor_psd(symmetrize(f.covariance));
      const Eigen::VectorXd x_mean = f.mean;
      const Eigen::VectorXd f_mean = p.mean;
      const int n_x = f.dim();
      Integrand g{n_x, n_x, [&](const Eigen::VectorXd& x) {
                    const Eigen::VectorXd fx = model.transition(x, f.timestamp);
                    Eigen::MatrixXd outer = (x - x_mean) * (fx - f_mean).transpose();
                    return Eigen::VectorXd(
                        Eigen::Map<Eigen::VectorXd>(outer.data(), n_x * n_x));
                  }};
      cross = run_sir_pass(x_mean, factor, {g}, *config, *rng, false)
                  .estimates.front()
                  .value_matrix();
    } else {
      throw MissingCrossCov("smooth: prediction " + std::to_string(m) +
                            " has no stored cross-covariance");
    }

    const Eigen::MatrixXd pred_cov = symmetrize(p.covariance);
    Eigen::LLT<Eigen::MatrixXd> llt(pred_cov);
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefinite("smooth: predicted covariance is not invertible");
    }
    const Eigen::MatrixXd gain = llt.solve(cross.transpose()).transpose();

    GaussianState s;
    s.mean = f.mean + gain * (smoothed[m + 1].mean - p.mean);
    s.covariance = symmetrize(
        f.covariance -
        gain * (pred_cov - smoothed[m + 1].covariance) * gain.transpose());
    s.timestamp = f.timestamp;
    smoothed[m] = std::move(s);
  }
  return smoothed;
}

}  // namespace

std::vector<GaussianState> smooth(const std::vector<GaussianState>& filtered,
                                  const std::vector<PredictionResult>& predictions,
                                  const StateSpaceModel& model) {
  return smooth_impl(filtered, predictions, model, nullptr, nullptr);
}

std::vector<GaussianState> smooth(const std::vector<GaussianState>& filtered,
                                  const std::vector<PredictionResult>& predictions,
                                  const StateSpaceModel& model, const SirConfig& config,
                                  RngStream& rng) {
  return smooth_impl(filtered, predictions, model, &config, &rng);
}

}  // namespace sif
