#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "sif/rng.hpp"
#include "sif/sir.hpp"
#include "sif/state.hpp"

namespace sif {

/// Weighted deviations of transformed points about a center, the building
/// block of the square-root moment algebra. Column i holds
/// sqrt(|w_i|) * (value_i - center); signs records the sign of w_i so that
/// signed Gram products reproduce covariance sums with negative weights
/// handled as rank-one downdates.
struct WeightedDeviationMatrix {
  Eigen::MatrixXd columns;  // d x n_S
  Eigen::VectorXd signs;    // entries +1 or -1

  /// Sum_i sign_i * col_i(this) * col_i(other)^T. Both operands must come
  /// from the same weight sequence.
  Eigen::MatrixXd signed_product(const WeightedDeviationMatrix& other) const;
  Eigen::MatrixXd signed_gram() const { return signed_product(*this); }
};

WeightedDeviationMatrix make_deviation_matrix(const Eigen::MatrixXd& values,
                                              const Eigen::VectorXd& center,
                                              const Eigen::VectorXd& weights);

/// Everything the square-root smoother needs from one forward transition
/// m -> m+1: the filtered and predicted beliefs plus the deviation matrices
/// of the filtering-density points and their transition images.
struct SqrtSmootherStep {
  SqrtGaussianState filtered;                // at m
  SqrtGaussianState predicted;               // at m+1
  WeightedDeviationMatrix dev_filtered;      // points about the filtered mean
  WeightedDeviationMatrix dev_transformed;   // f(points) about the predicted mean
  Eigen::MatrixXd process_noise_factor;      // lower-triangular factor of Q
};

struct SqrtPredictionResult {
  SqrtGaussianState predicted;
  std::optional<SqrtSmootherStep> forward;   // final step, when requested
  std::optional<Eigen::MatrixXd> cross_cov;  // final step, when requested
};

/// Square-root prediction. The predicted factor is the triangularization of
/// the positively weighted transition deviations stacked with the process
/// noise factor; negatively weighted columns are applied as downdates.
/// Shares its point stream layout with predict(), so identical streams give
/// matching moments up to roundoff.
SqrtPredictionResult predict_sqrt(const SqrtGaussianState& state,
                                  const StateSpaceModel& model, int steps,
                                  const SirConfig& config, RngStream& rng,
                                  bool want_forward_data = false);

struct SqrtUpdateResult {
  SqrtGaussianState filtered;
  Eigen::VectorXd innovation;                // wrapped on angular components
  Eigen::MatrixXd gain;
  Eigen::VectorXd predicted_measurement;     // mean of z
  Eigen::MatrixXd innovation_factor;         // lower-triangular, P^zz = F*F^T
};

/// Square-root measurement update. The gain comes from two triangular solves
/// against the factored innovation covariance; the filtered factor is built
/// from gain-corrected deviation columns stacked with gain * noise factor.
SqrtUpdateResult update_sqrt(const SqrtGaussianState& predicted,
                             const Eigen::VectorXd& measurement,
                             const StateSpaceModel& model, const SirConfig& config,
                             RngStream& rng);

/// Square-root fixed-interval smoother. forward[m] must describe the
/// transition from time m to m+1; last_filtered is the final filtered belief.
/// Returns smoothed beliefs in square-root form, last element identical to
/// last_filtered.
std::vector<SqrtGaussianState> smooth_sqrt(const std::vector<SqrtSmootherStep>& forward,
                                           const SqrtGaussianState& last_filtered);

/// Rebuild the forward data of one step from the stream state that produced
/// it. `rng_at_predict` must be a copy of the stream taken just before the
/// original predict_sqrt call; the result is bit-identical to the stored one.
SqrtSmootherStep regenerate_forward_step(const SqrtGaussianState& filtered,
                                         const StateSpaceModel& model,
                                         const SirConfig& config,
                                         RngStream rng_at_predict);

}  // namespace sif
