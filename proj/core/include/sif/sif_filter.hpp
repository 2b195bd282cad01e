#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "sif/rng.hpp"
#include "sif/sir.hpp"
#include "sif/state.hpp"

namespace sif {

/// How Gaussian-weighted moments are assembled from a point stream.
///  - Raw: one batched pass over {g, g*g^T, x*g^T}; central moments follow by
///    subtracting products of means. Default.
///  - Dedicated: the same point stream, but central-moment integrands
///    (g - mean)(g - mean)^T evaluated against the freshly estimated mean.
/// Both paths agree up to roundoff on identical streams.
enum class MomentPath { Raw, Dedicated };

struct SifOptions {
  MomentPath moment_path = MomentPath::Raw;
  /// Add the estimated error covariance of the predicted-measurement mean to
  /// the innovation covariance before forming the gain.
  bool inflate_mean_error = false;
};

/// Output of a prediction. cross_cov holds E[(x - x^)(f(x) - x^+)^T] for the
/// final step when requested; the smoother consumes it.
struct PredictionResult {
  GaussianState predicted;
  std::optional<Eigen::MatrixXd> cross_cov;
};

struct UpdateResult {
  GaussianState filtered;
  Eigen::VectorXd innovation;            // wrapped on angular components
  Eigen::MatrixXd gain;
  GaussianState predicted_measurement;   // mean and covariance of z
};

/// Propagate a Gaussian belief `steps` transitions forward. Each step runs one
/// batched integration pass for the transition moments and adds the process
/// noise. Covariances are re-symmetrized before factorization.
PredictionResult predict(const GaussianState& state, const StateSpaceModel& model,
                         int steps, const SirConfig& config, RngStream& rng,
                         bool want_cross_cov = false, const SifOptions& options = {});

/// Condition a predicted belief on a measurement. One batched pass produces
/// the measurement mean, covariance and state-measurement cross-covariance;
/// the gain is obtained by linear solve against the innovation covariance.
UpdateResult update(const GaussianState& predicted, const Eigen::VectorXd& measurement,
                    const StateSpaceModel& model, const SirConfig& config,
                    RngStream& rng, const SifOptions& options = {});

/// Fixed-interval smoother over a forward pass. filtered has length T+1;
/// predictions[m] must be the one-step prediction from filtered[m] and carry
/// its cross-covariance (throws MissingCrossCov otherwise). Returns smoothed
/// beliefs, last element identical to the last filtered state.
std::vector<GaussianState> smooth(const std::vector<GaussianState>& filtered,
                                  const std::vector<PredictionResult>& predictions,
                                  const StateSpaceModel& model);

/// Same, but any prediction lacking a stored cross-covariance gets it
/// recomputed with a fresh integration pass over the filtering density.
std::vector<GaussianState> smooth(const std::vector<GaussianState>& filtered,
                                  const std::vector<PredictionResult>& predictions,
                                  const StateSpaceModel& model, const SirConfig& config,
                                  RngStream& rng);

}  // namespace sif
