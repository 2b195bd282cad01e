#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "sif/baselines.hpp"
#include "sif/bench.hpp"
#include "sif/scenario.hpp"
#include "sif/sif_filter.hpp"
#include "sif/sqrt_filter.hpp"

using namespace sif;

namespace {

struct LinearSetup {
  Eigen::MatrixXd f, h, q, r;
  StateSpaceModel model;          // with analytic Jacobians
  GaussianState prior;
  std::vector<Eigen::VectorXd> z;
};

LinearSetup make_linear_setup(std::uint64_t seed, int steps) {
  oracle::Rng rng(seed);
  LinearSetup s;
  const int n = 4, m = 2;
  s.f = oracle::random_transition(n, rng);
  s.h = rng.normal_matrix(m, n);
  s.q = oracle::random_spd(n, rng, 0.2);
  s.r = oracle::random_spd(m, rng, 0.2);
  s.prior = {rng.normal_vector(n), oracle::random_spd(n, rng), 0};

  s.model.state_dim = n;
  s.model.measurement_dim = m;
  const Eigen::MatrixXd f = s.f, h = s.h;
  s.model.transition = [f](const Eigen::VectorXd& x, int) { return f * x; };
  s.model.measurement = [h](const Eigen::VectorXd& x, int) { return h * x; };
  s.model.process_noise = s.q;
  s.model.measurement_noise = s.r;
  s.model.transition_jacobian = [f](const Eigen::VectorXd&, int) { return f; };
  s.model.measurement_jacobian = [h](const Eigen::VectorXd&, int) { return h; };

  Eigen::VectorXd x = oracle::gaussian_draw(s.prior.mean, s.prior.covariance, rng);
  s.z.resize(steps + 1);
  for (int k = 1; k <= steps; ++k) {
    x = oracle::gaussian_draw(s.f * x, s.q, rng);
    s.z[k] = oracle::gaussian_draw(s.h * x, s.r, rng);
  }
  return s;
}

}  // namespace

TEST_CASE("an uninformative measurement leaves the prediction in place") {
  const LinearSetup s = make_linear_setup(61, 1);
  const GaussianState out =
      kf_step(s.prior, Eigen::Vector2d(1.0, -2.0), s.f,
              Eigen::MatrixXd::Identity(2, 4).eval(), s.q,
              (1e12 * Eigen::MatrixXd::Identity(2, 2)).eval());
  const GaussianState pred = kf_predict(s.prior, s.f, s.q);
  CHECK(oracle::rel_err(out.mean, pred.mean) < 1e-3);
  CHECK(oracle::rel_err(out.covariance, pred.covariance) < 1e-3);
}

TEST_CASE("the scalar textbook case comes out by hand") {
  // Prior N(0, 1), static state, unit measurement noise, z = 2:
  // gain 1/2, posterior N(1, 1/2).
  GaussianState prior{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), 0};
  const GaussianState out = kf_step(
      prior, Eigen::VectorXd::Constant(1, 2.0), Eigen::MatrixXd::Identity(1, 1),
      Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Zero(1, 1),
      Eigen::MatrixXd::Identity(1, 1));
  CHECK(out.mean(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.covariance(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("the linear filter agrees with the textbook oracle over a track") {
  const int steps = 20;
  const LinearSetup s = make_linear_setup(62, steps);
  GaussianState state = s.prior;
  oracle::Belief ref{s.prior.mean, s.prior.covariance};
  for (int k = 1; k <= steps; ++k) {
    state = kf_step(state, s.z[k], s.f, s.h, s.q, s.r);
    ref = oracle::kf_update(oracle::kf_predict(ref, s.f, s.q), s.z[k], s.h, s.r);
    CHECK(oracle::max_abs(state.mean - ref.mean) < 1e-9);
    CHECK(oracle::max_abs(state.covariance - ref.cov) < 1e-9);
  }
}

TEST_CASE("the linearized filter collapses to the linear one on linear models") {
  const int steps = 10;
  const LinearSetup s = make_linear_setup(63, steps);
  GaussianState kf_state = s.prior;
  GaussianState ekf_state = s.prior;
  for (int k = 1; k <= steps; ++k) {
    kf_state = kf_step(kf_state, s.z[k], s.f, s.h, s.q, s.r);
    ekf_state = ekf_step(ekf_state, s.z[k], s.model);
    CHECK(oracle::max_abs(ekf_state.mean - kf_state.mean) < 1e-10);
    CHECK(oracle::max_abs(ekf_state.covariance - kf_state.covariance) < 1e-10);
  }
}

TEST_CASE("numeric and analytic radar Jacobians agree away from the radar") {
  const ScenarioConfig config;
  const StateSpaceModel model = make_scenario_model(config);
  REQUIRE(model.measurement_jacobian);
  REQUIRE(model.transition_jacobian);

  SUBCASE("at the documented operating point") {
    Eigen::Vector4d x(60.0, 1.0, 10.0, 1.0);
    const Eigen::MatrixXd analytic = model.measurement_jacobian(x, 0);
    const Eigen::MatrixXd numeric = numeric_jacobian(model.measurement, x, 0);
    CHECK(oracle::max_abs(analytic - numeric) < 1e-6);
  }

  SUBCASE("at random states with range above one") {
    oracle::Rng rng(64);
    int tested = 0;
    while (tested < 25) {
      Eigen::Vector4d x(40.0 + 30.0 * rng.uniform(), 2.0 * rng.normal(),
                        -10.0 + 20.0 * rng.uniform(), 2.0 * rng.normal());
      const double range = std::hypot(x(0) - 50.0, x(2));
      if (range <= 1.0) continue;
      ++tested;
      CHECK(oracle::max_abs(model.measurement_jacobian(x, 0) -
                            numeric_jacobian(model.measurement, x, 0)) < 1e-6);
      CHECK(oracle::max_abs(model.transition_jacobian(x, 0) -
                            numeric_jacobian(model.transition, x, 0)) < 1e-6);
    }
  }
}

TEST_CASE("the sigma-point filter collapses to the linear one on linear models") {
  const int steps = 10;
  const LinearSetup s = make_linear_setup(65, steps);
  const UkfParams params{0.5, 2.0, -1.0};
  GaussianState kf_state = s.prior;
  GaussianState ukf_state = s.prior;
  for (int k = 1; k <= steps; ++k) {
    kf_state = kf_step(kf_state, s.z[k], s.f, s.h, s.q, s.r);
    ukf_state = ukf_step(ukf_state, s.z[k], s.model, params);
    CHECK(oracle::max_abs(ukf_state.mean - kf_state.mean) < 1e-9);
    CHECK(oracle::max_abs(ukf_state.covariance - kf_state.covariance) < 1e-9);
  }
}

TEST_CASE("an identity transition without noise is a fixed point of prediction") {
  StateSpaceModel model;
  model.state_dim = 3;
  model.measurement_dim = 3;
  model.transition = [](const Eigen::VectorXd& x, int) { return x; };
  model.measurement = [](const Eigen::VectorXd& x, int) { return x; };
  model.process_noise = Eigen::MatrixXd::Zero(3, 3);
  model.measurement_noise = Eigen::MatrixXd::Identity(3, 3);

  oracle::Rng rng(66);
  const GaussianState state{rng.normal_vector(3), oracle::random_spd(3, rng), 0};
  const GaussianState out = ukf_predict(state, model, {0.5, 2.0, 0.0});
  CHECK(oracle::max_abs(out.mean - state.mean) < 1e-12);
  CHECK(oracle::max_abs(out.covariance - state.covariance) < 1e-12);
}

TEST_CASE("degenerate sigma-point scaling is rejected") {
  const LinearSetup s = make_linear_setup(67, 1);
  // alpha^2 (n + kappa) = 0 collapses every sigma point onto the mean.
  CHECK_THROWS_AS(ukf_step(s.prior, s.z[1], s.model, {0.5, 2.0, -4.0}),
                  InvalidScaling);
}

TEST_CASE("all five filters coincide on a linear track") {
  const int steps = 15;
  const LinearSetup s = make_linear_setup(68, steps);
  const SirConfig sir{5, 0.0};
  RngStream sif_rng(71, 0);
  RngStream sqrt_rng(72, 0);

  GaussianState kf_state = s.prior;
  GaussianState ekf_state = s.prior;
  GaussianState ukf_state = s.prior;
  GaussianState sif_state = s.prior;
  SqrtGaussianState sqrt_state = SqrtGaussianState::from_gaussian(s.prior);

  for (int k = 1; k <= steps; ++k) {
    kf_state = kf_step(kf_state, s.z[k], s.f, s.h, s.q, s.r);
    ekf_state = ekf_step(ekf_state, s.z[k], s.model);
    ukf_state = ukf_step(ukf_state, s.z[k], s.model, {0.5, 2.0, -1.0});
    sif_state = update(predict(sif_state, s.model, 1, sir, sif_rng).predicted,
                       s.z[k], s.model, sir, sif_rng)
                    .filtered;
    sqrt_state = update_sqrt(
                     predict_sqrt(sqrt_state, s.model, 1, sir, sqrt_rng).predicted,
                     s.z[k], s.model, sir, sqrt_rng)
                     .filtered;

    for (const GaussianState* other : {&ekf_state, &ukf_state, &sif_state}) {
      CHECK(oracle::max_abs(other->mean - kf_state.mean) < 1e-8);
      CHECK(oracle::max_abs(other->covariance - kf_state.covariance) < 1e-8);
    }
    const GaussianState sq = sqrt_state.to_gaussian();
    CHECK(oracle::max_abs(sq.mean - kf_state.mean) < 1e-8);
    CHECK(oracle::max_abs(sq.covariance - kf_state.covariance) < 1e-8);
  }
}

TEST_CASE("the classical smoother matches the textbook recursion") {
  const int steps = 20;
  const LinearSetup s = make_linear_setup(69, steps);
  std::vector<GaussianState> filtered{s.prior};
  std::vector<oracle::Belief> ref_filtered{{s.prior.mean, s.prior.covariance}};
  std::vector<oracle::Belief> ref_predicted;
  for (int k = 1; k <= steps; ++k) {
    filtered.push_back(kf_step(filtered.back(), s.z[k], s.f, s.h, s.q, s.r));
    ref_predicted.push_back(oracle::kf_predict(ref_filtered.back(), s.f, s.q));
    ref_filtered.push_back(
        oracle::kf_update(ref_predicted.back(), s.z[k], s.h, s.r));
  }
  const auto smoothed = rtss_smooth(filtered, s.f, s.q);
  const auto want = oracle::rtss(ref_filtered, ref_predicted, s.f);
  REQUIRE(smoothed.size() == want.size());
  for (std::size_t m = 0; m < want.size(); ++m) {
    CHECK(oracle::max_abs(smoothed[m].mean - want[m].mean) < 1e-9);
    CHECK(oracle::max_abs(smoothed[m].covariance - want[m].cov) < 1e-9);
  }
}

TEST_CASE("the linearized filter is badly overconfident on the radar scenario") {
  // The near-radar geometry is the stress case: the consistency measure of
  // the linearized filter lands an order of magnitude above the state
  // dimension, which is the documented failure mode it exists to show.
  ScenarioConfig config;
  config.mc_runs = 1000;
  config.seed = 5;
  const MetricsReport report =
      run_monte_carlo(config, std::vector<FilterKind>{FilterKind::Ekf}, {});
  REQUIRE(report.filters.size() == 1);
  CHECK(report.filters[0].anees > 8.0);
}
