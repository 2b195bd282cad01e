#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "sif/rng.hpp"
#include "sif/state.hpp"

namespace sif {

/// Configuration of the degree-3 stochastic integration rule.
///
/// The rule averages randomized sigma-point quadratures: each iteration draws
/// a Haar-uniform rotation and a chi-distributed radius, evaluates the
/// integrand on a symmetric point set, and folds the result into running
/// mean / error-covariance recursions. Iteration stops at max_iterations or
/// as soon as the trace of the error covariance falls below error_tolerance.
struct SirConfig {
  int max_iterations = 10;
  /// Early-stop threshold on trace of the error covariance. Zero (the
  /// default) disables early stopping so exactly max_iterations run. The
  /// check starts with the second iteration because a single iteration
  /// carries no spread information.
  double error_tolerance = 0.0;
};

/// One iteration of the rule: 2*n_x + 1 points and their weights.
/// Column 0 is the central point (the Gaussian mean); columns 1..n_x are the
/// negative branch -rho*S*C*e_i + mean and columns n_x+1..2*n_x the positive
/// branch. Side weights are 1/(2*rho^2); the central weight 1 - n_x/rho^2 may
/// be negative.
struct SirIterationPoints {
  Eigen::MatrixXd points;   // n_x x (2*n_x + 1)
  Eigen::VectorXd weights;  // 2*n_x + 1, sums to 1 up to roundoff
  Eigen::MatrixXd rotation; // the orthogonal draw C
  double radius = 0.0;      // the chi(n_x + 2) draw rho
};

/// Flattened union of several iterations with averaged weights. Column 0 is
/// the shared central point; the remaining columns follow iteration order
/// (iteration-major, point-minor). The weighted sum over this set reproduces
/// the recursive estimate exactly.
struct SirPointSet {
  Eigen::MatrixXd points;   // n_x x n_S, n_S = 2*n_x*N + 1
  Eigen::VectorXd weights;  // n_S, sums to 1 up to roundoff
};

/// Vector- or matrix-valued integrand. Outputs are flattened column-major
/// into a vector of length rows*cols.
struct Integrand {
  int rows = 1;
  int cols = 1;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval;
};

/// Result of integrating one integrand against a Gaussian density.
struct IntegralEstimate {
  Eigen::VectorXd value;      // flattened rows x cols, column-major
  int rows = 1;
  int cols = 1;
  Eigen::MatrixXd error_cov;  // unbiased covariance estimate of `value`
  int iterations = 0;         // N
  int total_points = 0;       // N * (2*n_x + 1)

  Eigen::MatrixXd value_matrix() const;
};

/// Draw one iteration of points for N(mean, factor*factor^T). Consumes one
/// orthogonal draw followed by one radius draw from the stream.
SirIterationPoints generate_iteration(const Eigen::VectorXd& mean,
                                      const Eigen::MatrixXd& factor,
                                      RngStream& rng);

/// Flatten iterations into a single weighted point set, averaging the central
/// weight across iterations and dividing side weights by the iteration count.
SirPointSet concatenate(const std::vector<SirIterationPoints>& iterations);

/// Integrate a single integrand against N(state.mean, state.covariance).
IntegralEstimate integrate(const Integrand& integrand, const GaussianState& density,
                           const SirConfig& config, RngStream& rng);

/// Integrate several integrands over one shared point stream. Every integrand
/// sees the identical point/weight sequence; the early-stop decision is taken
/// on the first integrand only. A batch of one is bit-identical to a solo
/// integrate call on the same stream.
std::vector<IntegralEstimate> integrate_batch(const std::vector<Integrand>& integrands,
                                              const GaussianState& density,
                                              const SirConfig& config, RngStream& rng);

/// Low-level pass over one point stream, shared by the full and square-root
/// estimators so that both consume randomness identically. Optionally records
/// the per-iteration points and the raw integrand values on the flattened set
/// (column order matching concatenate()).
struct SirPassResult {
  std::vector<IntegralEstimate> estimates;
  std::vector<SirIterationPoints> iterations;  // kept when requested
  std::vector<Eigen::MatrixXd> values;         // per integrand, dim x n_S
};

SirPassResult run_sir_pass(const Eigen::VectorXd& mean, const Eigen::MatrixXd& factor,
                           const std::vector<Integrand>& integrands,
                           const SirConfig& config, RngStream& rng,
                           bool keep_points);

}  // namespace sif
