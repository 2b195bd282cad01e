// Whole-step benchmarks: one predict + update cycle per filter on the
// bearing-range tracking model, plus full forward/backward smoothing passes.

#include <benchmark/benchmark.h>

#include "sif/baselines.hpp"
#include "sif/scenario.hpp"
#include "sif/sif_filter.hpp"
#include "sif/sqrt_filter.hpp"

namespace {

struct Fixture {
  sif::ScenarioConfig config;
  sif::StateSpaceModel model;
  sif::GaussianState prior;
  Eigen::VectorXd z;

  Fixture() : model(sif::make_scenario_model(config)), prior(sif::scenario_prior(config)) {
    sif::RngStream rng(7);
    const auto track = sif::simulate_truth(config, rng);
    z = track.measurements[1];
  }
};

void BM_SifStep(benchmark::State& state) {
  Fixture fx;
  sif::SirConfig sir;
  sir.max_iterations = static_cast<int>(state.range(0));
  sif::RngStream rng(42);
  for (auto _ : state) {
    const auto prediction = sif::predict(fx.prior, fx.model, 1, sir, rng);
    benchmark::DoNotOptimize(
        sif::update(prediction.predicted, fx.z, fx.model, sir, rng));
  }
}
BENCHMARK(BM_SifStep)->Arg(1)->Arg(5)->Arg(10);

void BM_SqrtSifStep(benchmark::State& state) {
  Fixture fx;
  sif::SirConfig sir;
  sir.max_iterations = static_cast<int>(state.range(0));
  const auto prior = sif::SqrtGaussianState::from_gaussian(fx.prior);
  sif::RngStream rng(42);
  for (auto _ : state) {
    const auto prediction = sif::predict_sqrt(prior, fx.model, 1, sir, rng);
    benchmark::DoNotOptimize(
        sif::update_sqrt(prediction.predicted, fx.z, fx.model, sir, rng));
  }
}
BENCHMARK(BM_SqrtSifStep)->Arg(1)->Arg(5)->Arg(10);

void BM_EkfStep(benchmark::State& state) {
  Fixture fx;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sif::ekf_step(fx.prior, fx.z, fx.model));
  }
}
BENCHMARK(BM_EkfStep);

void BM_UkfStep(benchmark::State& state) {
  Fixture fx;
  const sif::UkfParams params{0.5, 2.0, -1.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sif::ukf_step(fx.prior, fx.z, fx.model, params));
  }
}
BENCHMARK(BM_UkfStep);

void BM_SifForwardSmooth(benchmark::State& state) {
  Fixture fx;
  sif::RngStream truth_rng(7);
  const auto track = sif::simulate_truth(fx.config, truth_rng);
  sif::SirConfig sir;
  sir.max_iterations = 10;
  for (auto _ : state) {
    sif::RngStream rng(42);
    std::vector<sif::GaussianState> filtered;
    std::vector<sif::PredictionResult> predictions;
    auto belief = fx.prior;
    for (int k = 0; k <= fx.config.horizon; ++k) {
      if (k > 0) {
        auto prediction = sif::predict(belief, fx.model, 1, sir, rng, true);
        belief = prediction.predicted;
        predictions.push_back(std::move(prediction));
      }
      belief = sif::update(belief, track.measurements[k], fx.model, sir, rng).filtered;
      filtered.push_back(belief);
    }
    benchmark::DoNotOptimize(sif::smooth(filtered, predictions, fx.model));
  }
}
BENCHMARK(BM_SifForwardSmooth);

}  // namespace

BENCHMARK_MAIN();
