#include "sif/sir.hpp"

#include <cmath>

#include "sif/errors.hpp"
#include "sif/linalg.hpp"

namespace sif {

namespace {

Eigen::VectorXd eval_checked(const Integrand& g, const Eigen::VectorXd& x) {
  Eigen::VectorXd out;
  try {
    out = g.eval(x);
  } catch (const std::exception& e) {
    throw IntegrandFailure(std::string("integrand threw: ") + e.what(), x);
  }
  if (out.size() != static_cast<Eigen::Index>(g.rows) * g.cols) {
    throw IntegrandFailure("integrand returned output of wrong size", x);
  }
  return out;
}

void validate_inputs(const Eigen::VectorXd& mean, const Eigen::MatrixXd& factor,
                     const std::vector<Integrand>& integrands, const SirConfig& config) {
  if (integrands.empty()) throw EmptyInput("run_sir_pass: no integrands");
  if (factor.rows() != mean.size() || factor.cols() != mean.size()) {
    throw DimensionMismatch("run_sir_pass: factor does not match mean dimension");
  }
  if (config.max_iterations < 1) {
    throw std::invalid_argument("SirConfig: max_iterations must be >= 1");
  }
  if (config.error_tolerance < 0.0) {
    throw std::invalid_argument("SirConfig: error_tolerance must be >= 0");
  }
  for (const auto& g : integrands) {
    if (g.rows < 1 || g.cols < 1 || !g.eval) {
      throw std::invalid_argument("Integrand: needs positive shape and a callable");
    }
  }
}

}  // namespace

Eigen::MatrixXd IntegralEstimate::value_matrix() const {
  return Eigen::Map<const Eigen::MatrixXd>(value.data(), rows, cols);
}

SirIterationPoints generate_iteration(const Eigen::VectorXd& mean,
                                      const Eigen::MatrixXd& factor,
                                      RngStream& rng) {
  const int n = static_cast<int>(mean.size());
  if (factor.rows() != n || factor.cols() != n) {
    throw DimensionMismatch("generate_iteration: factor does not match mean dimension");
  }
  SirIterationPoints it;
  it.rotation = random_orthogonal(n, rng);
  it.radius = sample_chi(n + 2, rng);

  const double rho2 = it.radius * it.radius;
  const double side_weight = 0.5 / rho2;
  const Eigen::MatrixXd branch = it.radius * (factor * it.rotation);

  it.points.resize(n, 2 * n + 1);
  it.weights.resize(2 * n + 1);
  it.points.col(0) = mean;
  it.weights(0) = 1.0 - static_cast<double>(n) / rho2;
  for (int i = 0; i < n; ++i) {
    it.points.col(1 + i) = mean - branch.col(i);
    it.points.col(1 + n + i) = mean + branch.col(i);
    it.weights(1 + i) = side_weight;
    it.weights(1 + n + i) = side_weight;
  }
  return it;
}

SirPointSet concatenate(const std::vector<SirIterationPoints>& iterations) {
  if (iterations.empty()) throw EmptyInput("concatenate: no iterations");
  const Eigen::Index n = iterations.front().points.rows();
  const Eigen::Index per_iter = iterations.front().points.cols();  // 2*n_x + 1
  const auto count = static_cast<Eigen::Index>(iterations.size());
  const double inv_n = 1.0 / static_cast<double>(count);

  SirPointSet set;
  set.points.resize(n, (per_iter - 1) * count + 1);
  set.weights.resize((per_iter - 1) * count + 1);
  set.points.col(0) = iterations.front().points.col(0);

  double central = 0.0;
  Eigen::Index col = 1;
  for (const auto& it : iterations) {
    if (it.points.rows() != n || it.points.cols() != per_iter) {
      throw DimensionMismatch("concatenate: inconsistent iteration shapes");
    }
    central += it.weights(0);
    for (Eigen::Index j = 1; j < per_iter; ++j, ++col) {
      set.points.col(col) = it.points.col(j);
      set.weights(col) = it.weights(j) * inv_n;
    }
  }
  set.weights(0) = central * inv_n;
  return set;
}

SirPassResult run_sir_pass(const Eigen::VectorXd& mean, const Eigen::MatrixXd& factor,
                           const std::vector<Integrand>& integrands,
                           const SirConfig& config, RngStream& rng,
                           bool keep_points) {
  validate_inputs(mean, factor, integrands, config);
  const int n = static_cast<int>(mean.size());
  const int n_pts = 2 * n + 1;
  const auto n_g = integrands.size();

  // The central point never moves, so its evaluations are cached once.
  std::vector<Eigen::VectorXd> central(n_g);
  for (std::size_t gi = 0; gi < n_g; ++gi) {
    central[gi] = eval_checked(integrands[gi], mean);
  }

  std::vector<Eigen::VectorXd> i_hat(n_g);
  std::vector<Eigen::MatrixXd> sigma(n_g);
  for (std::size_t gi = 0; gi < n_g; ++gi) {
    const auto dim = central[gi].size();
    i_hat[gi] = Eigen::VectorXd::Zero(dim);
    sigma[gi] = Eigen::MatrixXd::Zero(dim, dim);
  }

  SirPassResult result;
  std::vector<std::vector<Eigen::MatrixXd>> kept_values;  // per iteration, per integrand
  Eigen::VectorXd frak, diff;

  int iter = 0;
  for (;;) {
    ++iter;
    SirIterationPoints it = generate_iteration(mean, factor, rng);

    std::vector<Eigen::MatrixXd> iter_values;
    if (keep_points) iter_values.resize(n_g);

    for (std::size_t gi = 0; gi < n_g; ++gi) {
      frak = it.weights(0) * central[gi];
      Eigen::MatrixXd* store = nullptr;
      if (keep_points) {
        iter_values[gi].resize(central[gi].size(), n_pts - 1);
        store = &iter_values[gi];
      }
      for (int j = 1; j < n_pts; ++j) {
        const Eigen::VectorXd val = eval_checked(integrands[gi], it.points.col(j));
        if (store) store->col(j - 1) = val;
        frak.noalias() += it.weights(j) * val;
      }
      // Running mean and unbiased covariance-of-the-mean recursions. diff must
      // be taken against the previous mean, and the first iteration defines a
      // zero spread.
      diff = frak - i_hat[gi];
      if (iter >= 2) {
        const double scale = static_cast<double>(iter - 2) / iter;
        sigma[gi] = scale * sigma[gi] +
                    (diff * diff.transpose()) / (static_cast<double>(iter) * iter);
      }
      i_hat[gi] += diff / static_cast<double>(iter);
    }

    if (keep_points) {
      result.iterations.push_back(std::move(it));
      kept_values.push_back(std::move(iter_values));
    }

    if (iter >= config.max_iterations) break;
    if (iter >= 2 && sigma[0].trace() < config.error_tolerance) break;
  }

  result.estimates.resize(n_g);
  for (std::size_t gi = 0; gi < n_g; ++gi) {
    auto& est = result.estimates[gi];
    est.value = std::move(i_hat[gi]);
    est.rows = integrands[gi].rows;
    est.cols = integrands[gi].cols;
    est.error_cov = std::move(sigma[gi]);
    est.iterations = iter;
    est.total_points = iter * n_pts;
  }

  if (keep_points) {
    // Assemble flattened value matrices in concatenate() column order.
    result.values.resize(n_g);
    for (std::size_t gi = 0; gi < n_g; ++gi) {
      const auto dim = central[gi].size();
      result.values[gi].resize(dim, static_cast<Eigen::Index>(iter) * (n_pts - 1) + 1);
      result.values[gi].col(0) = central[gi];
      Eigen::Index col = 1;
      for (int itn = 0; itn < iter; ++itn) {
        result.values[gi].middleCols(col, n_pts - 1) = kept_values[itn][gi];
        col += n_pts - 1;
      }
    }
  }
  return result;
}

IntegralEstimate integrate(const Integrand& integrand, const GaussianState& density,
                           const SirConfig& config, RngStream& rng) {
  return integrate_batch({integrand}, density, config, rng).front();
}

std::vector<IntegralEstimate> integrate_batch(const std::vector<Integrand>& integrands,
                                              const GaussianState& density,
                                              const SirConfig& config, RngStream& rng) {
  const Eigen::MatrixXd factor = factor_psd(density.covariance);
  return run_sir_pass(density.mean, factor, integrands, config, rng, false).estimates;
}

}  // namespace sif
