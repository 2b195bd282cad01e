// Micro-benchmarks for the integration-rule primitives: point generation,
// single and batched passes, and the flattening step.

#include <benchmark/benchmark.h>

#include "sif/linalg.hpp"
#include "sif/scenario.hpp"
#include "sif/sir.hpp"

namespace {

sif::GaussianState test_density() {
  sif::ScenarioConfig config;
  return sif::scenario_prior(config);
}

sif::Integrand measurement_integrand(const sif::StateSpaceModel& model) {
  return sif::Integrand{
      model.measurement_dim, 1,
      [&model](const Eigen::VectorXd& x) { return model.measurement(x, 0); }};
}

void BM_RandomOrthogonal(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  sif::RngStream rng(42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sif::random_orthogonal(dim, rng));
  }
}
BENCHMARK(BM_RandomOrthogonal)->Arg(2)->Arg(4)->Arg(8);

void BM_GenerateIteration(benchmark::State& state) {
  const auto density = test_density();
  const Eigen::MatrixXd factor = sif::factor_spd(density.covariance);
  sif::RngStream rng(42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sif::generate_iteration(density.mean, factor, rng));
  }
}
BENCHMARK(BM_GenerateIteration);

void BM_IntegratePass(benchmark::State& state) {
  sif::ScenarioConfig config;
  const auto model = sif::make_scenario_model(config);
  const auto density = test_density();
  const auto integrand = measurement_integrand(model);
  sif::SirConfig sir;
  sir.max_iterations = static_cast<int>(state.range(0));
  sif::RngStream rng(42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sif::integrate(integrand, density, sir, rng));
  }
}
BENCHMARK(BM_IntegratePass)->Arg(1)->Arg(5)->Arg(10);

// The three integrands a measurement update needs, evaluated on one shared
// point stream; compare against three times BM_IntegratePass.
void BM_IntegrateBatch(benchmark::State& state) {
  sif::ScenarioConfig config;
  const auto model = sif::make_scenario_model(config);
  const auto density = test_density();
  const int nz = model.measurement_dim;
  const int nx = model.state_dim;
  std::vector<sif::Integrand> batch;
  batch.push_back(measurement_integrand(model));
  batch.push_back({nz, nz, [&model](const Eigen::VectorXd& x) {
                     const Eigen::VectorXd z = model.measurement(x, 0);
                     return Eigen::MatrixXd(z * z.transpose()).reshaped();
                   }});
  batch.push_back({nx, nz, [&model](const Eigen::VectorXd& x) {
                     const Eigen::VectorXd z = model.measurement(x, 0);
                     return Eigen::MatrixXd(x * z.transpose()).reshaped();
                   }});
  sif::SirConfig sir;
  sir.max_iterations = static_cast<int>(state.range(0));
  sif::RngStream rng(42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sif::integrate_batch(batch, density, sir, rng));
  }
}
BENCHMARK(BM_IntegrateBatch)->Arg(5)->Arg(10);

void BM_Concatenate(benchmark::State& state) {
  const auto density = test_density();
  const Eigen::MatrixXd factor = sif::factor_spd(density.covariance);
  sif::RngStream rng(42);
  std::vector<sif::SirIterationPoints> iterations;
  for (int i = 0; i < 10; ++i) {
    iterations.push_back(sif::generate_iteration(density.mean, factor, rng));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(sif::concatenate(iterations));
  }
}
BENCHMARK(BM_Concatenate);

}  // namespace

BENCHMARK_MAIN();
