#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "sif/errors.hpp"
#include "sif/linalg.hpp"
#include "sif/scenario.hpp"
#include "sif/sif_filter.hpp"
#include "sif/sqrt_filter.hpp"

using namespace sif;

namespace {

bool is_lower_triangular(const Eigen::MatrixXd& m) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = i + 1; j < m.cols(); ++j)
      if (m(i, j) != 0.0) return false;
  return true;
}

Eigen::MatrixXd reconstruct(const SqrtGaussianState& s) {
  return s.factor * s.factor.transpose();
}

StateSpaceModel linear_model(const Eigen::MatrixXd& f, const Eigen::MatrixXd& h,
                             const Eigen::MatrixXd& q, const Eigen::MatrixXd& r) {
  StateSpaceModel model;
  model.state_dim = static_cast<int>(f.rows());
  model.measurement_dim = static_cast<int>(h.rows());
  model.transition = [f](const Eigen::VectorXd& x, int) { return f * x; };
  model.measurement = [h](const Eigen::VectorXd& x, int) { return h * x; };
  model.process_noise = q;
  model.measurement_noise = r;
  return model;
}

}  // namespace

TEST_CASE("signed deviation products reproduce weighted covariance sums") {
  oracle::Rng rng(41);
  const int d = 3, n = 9;
  const Eigen::MatrixXd values = rng.normal_matrix(d, n);
  const Eigen::VectorXd center = rng.normal_vector(d);
  Eigen::VectorXd weights(n);
  for (int i = 0; i < n; ++i) weights(i) = rng.normal();  // mixed signs

  const WeightedDeviationMatrix dev =
      make_deviation_matrix(values, center, weights);
  Eigen::MatrixXd want = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd diff = values.col(i) - center;
    want += weights(i) * diff * diff.transpose();
  }
  CHECK(oracle::max_abs(dev.signed_gram() - want) < 1e-10);

  const Eigen::MatrixXd other_values = rng.normal_matrix(d, n);
  const Eigen::VectorXd other_center = rng.normal_vector(d);
  const WeightedDeviationMatrix dev2 =
      make_deviation_matrix(other_values, other_center, weights);
  Eigen::MatrixXd want_cross = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < n; ++i)
    want_cross += weights(i) * (values.col(i) - center) *
                  (other_values.col(i) - other_center).transpose();
  CHECK(oracle::max_abs(dev.signed_product(dev2) - want_cross) < 1e-10);
}

TEST_CASE("a linear square-root prediction reconstructs the closed form") {
  oracle::Rng orng(42);
  const Eigen::MatrixXd f = oracle::random_transition(4, orng);
  const Eigen::MatrixXd q = oracle::random_spd(4, orng, 0.2);
  const StateSpaceModel model =
      linear_model(f, Eigen::MatrixXd::Identity(4, 4), q,
                   Eigen::MatrixXd::Identity(4, 4));
  const GaussianState prior{orng.normal_vector(4), oracle::random_spd(4, orng), 0};

  RngStream rng(51, 0);
  const SqrtPredictionResult pr =
      predict_sqrt(SqrtGaussianState::from_gaussian(prior), model, 1, {5, 0.0}, rng);
  CHECK(is_lower_triangular(pr.predicted.factor));
  CHECK(pr.predicted.factor.diagonal().minCoeff() >= 0.0);
  CHECK(oracle::max_abs(pr.predicted.mean - f * prior.mean) < 1e-9);
  CHECK(oracle::rel_err(reconstruct(pr.predicted),
                        f * prior.covariance * f.transpose() + q) < 1e-9);
}

TEST_CASE("without process noise the predicted factor is the compressed map image") {
  oracle::Rng orng(43);
  const Eigen::MatrixXd f = oracle::random_transition(3, orng);
  const StateSpaceModel model =
      linear_model(f, Eigen::MatrixXd::Identity(3, 3),
                   Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Identity(3, 3));
  const GaussianState prior{orng.normal_vector(3), oracle::random_spd(3, orng), 0};
  const SqrtGaussianState sqrt_prior = SqrtGaussianState::from_gaussian(prior);

  RngStream rng(52, 0);
  const SqrtPredictionResult pr = predict_sqrt(sqrt_prior, model, 1, {5, 0.0}, rng);
  CHECK(oracle::max_abs(pr.predicted.factor - triangularize(f * sqrt_prior.factor)) <
        1e-9);
}

TEST_CASE("a linear square-root update matches the Joseph-form covariance") {
  oracle::Rng orng(44);
  const Eigen::MatrixXd f = oracle::random_transition(4, orng);
  const Eigen::MatrixXd h = orng.normal_matrix(2, 4);
  const Eigen::MatrixXd q = oracle::random_spd(4, orng, 0.2);
  const Eigen::MatrixXd r = oracle::random_spd(2, orng, 0.2);
  const StateSpaceModel model = linear_model(f, h, q, r);
  const GaussianState predicted{orng.normal_vector(4), oracle::random_spd(4, orng), 1};
  const Eigen::VectorXd z = orng.normal_vector(2);

  RngStream rng(53, 0);
  const SqrtUpdateResult up = update_sqrt(SqrtGaussianState::from_gaussian(predicted),
                                          z, model, {5, 0.0}, rng);
  const oracle::Belief bp{predicted.mean, predicted.covariance};
  const oracle::Belief want = oracle::kf_update(bp, z, h, r);
  CHECK(oracle::max_abs(up.filtered.mean - want.mean) < 1e-9);
  CHECK(oracle::max_abs(reconstruct(up.filtered) - oracle::kf_joseph_cov(bp, h, r)) <
        1e-9);
  CHECK(is_lower_triangular(up.filtered.factor));
  // The reported innovation factor reproduces the innovation covariance.
  CHECK(oracle::rel_err(up.innovation_factor * up.innovation_factor.transpose(),
                        h * predicted.covariance * h.transpose() + r) < 1e-9);
}

TEST_CASE("zero innovation leaves the square-root mean untouched") {
  const ScenarioConfig config;
  const StateSpaceModel model = make_scenario_model(config);
  const SqrtGaussianState predicted =
      SqrtGaussianState::from_gaussian(scenario_prior(config));

  RngStream probe(54, 0);
  RngStream replay = probe;
  const SqrtUpdateResult first =
      update_sqrt(predicted, Eigen::Vector2d(0.1, 5.0), model, {10, 0.0}, probe);
  const SqrtUpdateResult second =
      update_sqrt(predicted, first.predicted_measurement, model, {10, 0.0}, replay);
  CHECK(oracle::max_abs(second.innovation) < 1e-12);
  CHECK(oracle::max_abs(second.filtered.mean - predicted.mean) < 1e-12);
}

TEST_CASE("full and square-root forms agree on shared point streams") {
  // Run both filters over the tracking scenario in lockstep, feeding each
  // operation copies of one master stream, and compare reconstructions.
  const ScenarioConfig config;
  const StateSpaceModel model = make_scenario_model(config);
  const GaussianState prior = scenario_prior(config);

  RngStream truth_rng(55, 0);
  const TrackRecord track = simulate_truth(config, truth_rng);

  RngStream master(55, 1);
  GaussianState full = prior;
  SqrtGaussianState sq = SqrtGaussianState::from_gaussian(prior);
  std::vector<GaussianState> full_filtered{full};
  std::vector<PredictionResult> full_predictions;
  std::vector<SqrtSmootherStep> sqrt_steps;

  for (int k = 1; k <= config.horizon; ++k) {
    RngStream mirror = master;
    PredictionResult pr = predict(full, model, 1, {10, 0.0}, master, true);
    SqrtPredictionResult spr = predict_sqrt(sq, model, 1, {10, 0.0}, mirror, true);
    CHECK(oracle::max_abs(spr.predicted.mean - pr.predicted.mean) < 1e-8);
    CHECK(oracle::rel_err(reconstruct(spr.predicted), pr.predicted.covariance) <
          1e-8);

    const UpdateResult up =
        update(pr.predicted, track.measurements[k], model, {10, 0.0}, master);
    const SqrtUpdateResult sup = update_sqrt(spr.predicted, track.measurements[k],
                                             model, {10, 0.0}, mirror);
    CHECK(oracle::max_abs(sup.filtered.mean - up.filtered.mean) < 1e-8);
    CHECK(oracle::rel_err(reconstruct(sup.filtered), up.filtered.covariance) <
          1e-8);
    CHECK(oracle::max_abs(sup.gain - up.gain) < 1e-8);

    full = up.filtered;
    sq = sup.filtered;
    full_filtered.push_back(full);
    full_predictions.push_back(std::move(pr));
    REQUIRE(spr.forward.has_value());
    sqrt_steps.push_back(std::move(*spr.forward));

    // Both forms must have consumed exactly the same draws.
    RngStream a = master, b = mirror;
    CHECK(a.next_u64() == b.next_u64());
  }

  SUBCASE("the smoothers agree too") {
    const std::vector<GaussianState> full_smoothed =
        smooth(full_filtered, full_predictions, model);
    const std::vector<SqrtGaussianState> sqrt_smoothed = smooth_sqrt(sqrt_steps, sq);
    REQUIRE(sqrt_smoothed.size() == full_smoothed.size());
    for (std::size_t m = 0; m < full_smoothed.size(); ++m) {
      CHECK(oracle::max_abs(sqrt_smoothed[m].mean - full_smoothed[m].mean) < 1e-7);
      CHECK(oracle::rel_err(reconstruct(sqrt_smoothed[m]),
                            full_smoothed[m].covariance) < 1e-7);
    }
  }
}

TEST_CASE("square-root smoothing of a linear track matches the classical recursion") {
  oracle::Rng orng(45);
  const int steps = 20;
  const Eigen::MatrixXd f = oracle::random_transition(4, orng);
  const Eigen::MatrixXd h = orng.normal_matrix(2, 4);
  const Eigen::MatrixXd q = oracle::random_spd(4, orng, 0.2);
  const Eigen::MatrixXd r = oracle::random_spd(2, orng, 0.2);
  const StateSpaceModel model = linear_model(f, h, q, r);
  const GaussianState prior{orng.normal_vector(4), oracle::random_spd(4, orng), 0};

  // Simulated data and the exact filtered/predicted/smoothed references.
  Eigen::VectorXd x = oracle::gaussian_draw(prior.mean, prior.covariance, orng);
  std::vector<Eigen::VectorXd> z(steps + 1);
  for (int k = 1; k <= steps; ++k) {
    x = oracle::gaussian_draw(f * x, q, orng);
    z[k] = oracle::gaussian_draw(h * x, r, orng);
  }
  std::vector<oracle::Belief> ref_filtered{{prior.mean, prior.covariance}};
  std::vector<oracle::Belief> ref_predicted;
  for (int k = 1; k <= steps; ++k) {
    ref_predicted.push_back(oracle::kf_predict(ref_filtered.back(), f, q));
    ref_filtered.push_back(oracle::kf_update(ref_predicted.back(), z[k], h, r));
  }
  const std::vector<oracle::Belief> want =
      oracle::rtss(ref_filtered, ref_predicted, f);

  RngStream rng(56, 0);
  SqrtGaussianState state = SqrtGaussianState::from_gaussian(prior);
  std::vector<SqrtSmootherStep> forward;
  for (int k = 1; k <= steps; ++k) {
    SqrtPredictionResult pr = predict_sqrt(state, model, 1, {5, 0.0}, rng, true);
    const SqrtUpdateResult up = update_sqrt(pr.predicted, z[k], model, {5, 0.0}, rng);
    forward.push_back(std::move(*pr.forward));
    state = up.filtered;
  }
  const std::vector<SqrtGaussianState> smoothed = smooth_sqrt(forward, state);

  REQUIRE(smoothed.size() == want.size());
  for (std::size_t m = 0; m < want.size(); ++m) {
    CHECK(oracle::max_abs(smoothed[m].mean - want[m].mean) < 1e-8);
    CHECK(oracle::max_abs(reconstruct(smoothed[m]) - want[m].cov) < 1e-8);
  }
  CHECK(oracle::max_abs(smoothed.back().factor - state.factor) == 0.0);
}

TEST_CASE("forward data can be regenerated from the stream state") {
  const ScenarioConfig config;
  const StateSpaceModel model = make_scenario_model(config);
  const SqrtGaussianState state =
      SqrtGaussianState::from_gaussian(scenario_prior(config));

  RngStream rng(57, 0);
  RngStream before = rng;
  const SqrtPredictionResult stored = predict_sqrt(state, model, 1, {10, 0.0}, rng, true);
  REQUIRE(stored.forward.has_value());

  const SqrtSmootherStep redone =
      regenerate_forward_step(state, model, {10, 0.0}, before);
  CHECK(oracle::max_abs(redone.predicted.mean - stored.forward->predicted.mean) == 0.0);
  CHECK(oracle::max_abs(redone.predicted.factor - stored.forward->predicted.factor) ==
        0.0);
  CHECK(oracle::max_abs(redone.dev_filtered.columns -
                        stored.forward->dev_filtered.columns) == 0.0);
  CHECK(oracle::max_abs(redone.dev_transformed.columns -
                        stored.forward->dev_transformed.columns) == 0.0);
}

TEST_CASE("smoothing without forward data is reported") {
  const SqrtGaussianState last{Eigen::VectorXd::Zero(2),
                               Eigen::MatrixXd::Identity(2, 2), 0};
  CHECK_THROWS_AS(smooth_sqrt({}, last), MissingForwardData);
}
