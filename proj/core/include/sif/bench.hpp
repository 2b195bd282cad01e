#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sif/baselines.hpp"
#include "sif/errors.hpp"
#include "sif/scenario.hpp"
#include "sif/sif_filter.hpp"
#include "sif/sir.hpp"

namespace sif {

enum class FilterKind { Kf, Ekf, Ukf, Sif, SifSqrt };

std::string filter_name(FilterKind kind);
std::optional<FilterKind> parse_filter_kind(const std::string& name);

struct BenchOptions {
  bool smooth = false;
  SirConfig sir{};
  UkfParams ukf{0.5, 2.0, -1.0};
  SifOptions sif_options{};
  /// Worker threads; 0 means hardware concurrency. Results are bit-identical
  /// for any thread count because runs derive their own streams and are
  /// reduced in run order.
  int threads = 1;
  bool collect_per_run = false;
};

/// Sequential estimator as the benchmark drives it: initialize with the prior,
/// then one step per time instant. The prior itself serves as the k = 0
/// filtering estimate; measurements are assimilated from k = 1 on.
class FilterEngine {
 public:
  virtual ~FilterEngine() = default;
  virtual void initialize(const GaussianState& prior) = 0;
  virtual void step(const Eigen::VectorXd& measurement, int k) = 0;
  virtual const GaussianState& current() const = 0;
  virtual bool supports_smoothing() const { return false; }
  virtual std::vector<GaussianState> smooth_all() {
    throw MissingForwardData("this filter does not smooth");
  }
};

/// Builds the engine for one Monte-Carlo run. The stream passed in is derived
/// from (seed, run index, filter slot), so runs are reproducible independent
/// of scheduling.
using EngineFactory = std::function<std::unique_ptr<FilterEngine>(
    const ScenarioConfig& config, int run_index, RngStream rng)>;

/// The stream that simulate_truth consumes for a given run. Part of the
/// reproducibility contract: external tools can regenerate any run's
/// truth/measurement record from (seed, run index) alone.
RngStream run_truth_stream(std::uint64_t seed, int run_index);

struct NamedEngine {
  std::string name;
  EngineFactory factory;
};

NamedEngine standard_engine(FilterKind kind, const BenchOptions& options);

struct FilterMetrics {
  std::string name;
  Eigen::VectorXd rmse;   // per state component, averaged over included runs
  double anees = 0.0;
  int divergences = 0;    // runs excluded from the averages
  double wall_seconds = 0.0;  // informational; never serialized
  std::optional<Eigen::VectorXd> smoothed_rmse;
  std::optional<double> smoothed_anees;
};

struct MetricsReport {
  int runs = 0;
  int horizon = 0;
  std::uint64_t seed = 0;
  bool smoothing = false;
  std::vector<FilterMetrics> filters;
  std::vector<std::string> per_run_rows;  // CSV rows when collect_per_run is set
};

/// Monte-Carlo study: every run simulates one truth/measurement record that
/// all engines consume, then per-run squared errors and NEES are aggregated.
/// A run is excluded (and counted) for a filter when an estimate turns
/// non-finite, a step NEES exceeds 1e6, or the filter fails numerically.
MetricsReport run_monte_carlo(const ScenarioConfig& config,
                              const std::vector<NamedEngine>& engines,
                              const BenchOptions& options);
MetricsReport run_monte_carlo(const ScenarioConfig& config,
                              const std::vector<FilterKind>& kinds,
                              const BenchOptions& options);

/// Summary renderers. Values are rounded to 4 decimal places; the JSON form
/// is byte-deterministic for identical (config, seed).
std::string metrics_to_text(const MetricsReport& report);
std::string metrics_to_json(const MetricsReport& report);
std::string metrics_to_csv(const MetricsReport& report);
std::string per_run_csv(const MetricsReport& report);

}  // namespace sif
