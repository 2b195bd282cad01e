#include "sif/bench.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "sif/errors.hpp"
#include "sif/linalg.hpp"
#include "sif/sqrt_filter.hpp"

#include <nlohmann/json.hpp>

namespace sif {

namespace {

constexpr double kNeesDivergence = 1e6;

class KfEngine final : public FilterEngine {
 public:
  KfEngine(const ScenarioConfig& config)
      : f_(scenario_transition_matrix(config)),
        h_(Eigen::MatrixXd::Identity(4, 4)),
        q_(scenario_process_noise(config)),
        r_(scenario_measurement_noise(config)) {
    if (!config.linear_measurement) {
      throw std::invalid_argument("kf engine requires the linear measurement variant");
    }
  }
  void initialize(const GaussianState& prior) override {
    filtered_.clear();
    current_ = prior;
  }
  void step(const Eigen::VectorXd& z, int k) override {
    if (k > 0) current_ = kf_update(kf_predict(current_, f_, q_), z, h_, r_).filtered;
    filtered_.push_back(current_);
  }
  const GaussianState& current() const override { return current_; }
  bool supports_smoothing() const override { return true; }
  std::vector<GaussianState> smooth_all() override {
    return rtss_smooth(filtered_, f_, q_);
  }

 private:
  Eigen::MatrixXd f_, h_, q_, r_;
  GaussianState current_;
  std::vector<GaussianState> filtered_;
};

class EkfEngine final : public FilterEngine {
 public:
  explicit EkfEngine(const ScenarioConfig& config) : model_(make_scenario_model(config)) {}
  void initialize(const GaussianState& prior) override { current_ = prior; }
  void step(const Eigen::VectorXd& z, int k) override {
    if (k > 0) current_ = ekf_update(ekf_predict(current_, model_), z, model_).filtered;
  }
  const GaussianState& current() const override { return current_; }

 private:
  StateSpaceModel model_;
  GaussianState current_;
};

class UkfEngine final : public FilterEngine {
 public:
  UkfEngine(const ScenarioConfig& config, const UkfParams& params)
      : model_(make_scenario_model(config)), params_(params) {}
  void initialize(const GaussianState& prior) override { current_ = prior; }
  void step(const Eigen::VectorXd& z, int k) override {
    if (k > 0) {
      current_ = ukf_update(ukf_predict(current_, model_, params_), z, model_, params_).filtered;
    }
  }
  const GaussianState& current() const override { return current_; }

 private:
  StateSpaceModel model_;
  UkfParams params_;
  GaussianState current_;
};

class SifEngine final : public FilterEngine {
 public:
  SifEngine(const ScenarioConfig& config, const BenchOptions& options, RngStream rng)
      : model_(make_scenario_model(config)),
        sir_(options.sir),
        sif_options_(options.sif_options),
        keep_for_smoothing_(options.smooth),
        rng_(rng) {}
  void initialize(const GaussianState& prior) override {
    filtered_.clear();
    predictions_.clear();
    current_ = prior;
  }
  void step(const Eigen::VectorXd& z, int k) override {
    if (k > 0) {
      PredictionResult pr =
          predict(current_, model_, 1, sir_, rng_, keep_for_smoothing_, sif_options_);
      current_ = update(pr.predicted, z, model_, sir_, rng_, sif_options_).filtered;
      if (keep_for_smoothing_) predictions_.push_back(std::move(pr));
    }
    if (keep_for_smoothing_) filtered_.push_back(current_);
  }
  const GaussianState& current() const override { return current_; }
  bool supports_smoothing() const override { return keep_for_smoothing_; }
  std::vector<GaussianState> smooth_all() override {
    return smooth(filtered_, predictions_, model_);
  }

 private:
  StateSpaceModel model_;
  SirConfig sir_;
  SifOptions sif_options_;
  bool keep_for_smoothing_;
  RngStream rng_;
  GaussianState current_;
  std::vector<GaussianState> filtered_;
  std::vector<PredictionResult> predictions_;
};

class SqrtSifEngine final : public FilterEngine {
 public:
  SqrtSifEngine(const ScenarioConfig& config, const BenchOptions& options, RngStream rng)
      : model_(make_scenario_model(config)),
        sir_(options.sir),
        keep_for_smoothing_(options.smooth),
        rng_(rng) {}
  void initialize(const GaussianState& prior) override {
    steps_.clear();
    sqrt_state_ = SqrtGaussianState::from_gaussian(prior);
    current_ = sqrt_state_.to_gaussian();
  }
  void step(const Eigen::VectorXd& z, int k) override {
    if (k > 0) {
      SqrtPredictionResult pr =
          predict_sqrt(sqrt_state_, model_, 1, sir_, rng_, keep_for_smoothing_);
      sqrt_state_ = update_sqrt(pr.predicted, z, model_, sir_, rng_).filtered;
      if (keep_for_smoothing_) steps_.push_back(std::move(*pr.forward));
      current_ = sqrt_state_.to_gaussian();
    }
  }
  const GaussianState& current() const override { return current_; }
  bool supports_smoothing() const override { return keep_for_smoothing_; }
  std::vector<GaussianState> smooth_all() override {
    std::vector<GaussianState> out;
    for (const auto& s : smooth_sqrt(steps_, sqrt_state_)) {
      out.push_back(s.to_gaussian());
    }
    return out;
  }

 private:
  StateSpaceModel model_;
  SirConfig sir_;
  bool keep_for_smoothing_;
  RngStream rng_;
  SqrtGaussianState sqrt_state_;
  GaussianState current_;
  std::vector<SqrtSmootherStep> steps_;
};

struct TrackMetrics {
  Eigen::VectorXd rmse;
  double anees = 0.0;
  bool divergent = false;
  Eigen::MatrixXd step_se;      // (horizon+1) x n_x
  Eigen::VectorXd step_nees;    // horizon+1
};

TrackMetrics score_track(const std::vector<Eigen::VectorXd>& truth,
                         const std::vector<GaussianState>& estimates,
                         bool normalize_by_horizon) {
  TrackMetrics out;
  const auto steps = static_cast<int>(truth.size());
  const auto n_x = truth.front().size();
  out.step_se.resize(steps, n_x);
  out.step_nees.resize(steps);

  if (static_cast<int>(estimates.size()) != steps) {
    out.divergent = true;
    return out;
  }
  for (int k = 0; k < steps; ++k) {
    const GaussianState& est = estimates[k];
    if (!est.mean.allFinite() || !est.covariance.allFinite()) {
      out.divergent = true;
      return out;
    }
    const Eigen::VectorXd err = truth[k] - est.mean;
    out.step_se.row(k) = err.array().square();
    Eigen::LLT<Eigen::MatrixXd> llt(symmetrize(est.covariance));
    if (llt.info() != Eigen::Success) {
      out.divergent = true;
      return out;
    }
    const double nees = err.dot(llt.solve(err));
    if (!std::isfinite(nees) || nees > kNeesDivergence) {
      out.divergent = true;
      return out;
    }
    out.step_nees(k) = nees;
  }
  const double divisor = normalize_by_horizon ? steps - 1 : steps;
  out.rmse = (out.step_se.colwise().sum() / divisor).cwiseSqrt();
  out.anees = out.step_nees.sum() / divisor;
  return out;
}

struct RunSlot {
  TrackMetrics filtered;
  std::optional<TrackMetrics> smoothed;
  double wall_seconds = 0.0;
  bool failed = false;  // numeric failure inside the filter
};

std::string format_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

double round4(double v) {
  if (!std::isfinite(v)) return v;
  return std::round(v * 1e4) / 1e4;
}

}  // namespace

std::string filter_name(FilterKind kind) {
  switch (kind) {
    case FilterKind::Kf: return "kf";
    case FilterKind::Ekf: return "ekf";
    case FilterKind::Ukf: return "ukf";
    case FilterKind::Sif: return "sif";
    case FilterKind::SifSqrt: return "sif-sqrt";
  }
  return "unknown";
}

std::optional<FilterKind> parse_filter_kind(const std::string& name) {
  if (name == "kf") return FilterKind::Kf;
  if (name == "ekf") return FilterKind::Ekf;
  if (name == "ukf") return FilterKind::Ukf;
  if (name == "sif") return FilterKind::Sif;
  if (name == "sif-sqrt") return FilterKind::SifSqrt;
  return std::nullopt;
}

NamedEngine standard_engine(FilterKind kind, const BenchOptions& options) {
  NamedEngine named;
  named.name = filter_name(kind);
  switch (kind) {
    case FilterKind::Kf:
      named.factory = [](const ScenarioConfig& c, int, RngStream) {
        return std::unique_ptr<FilterEngine>(new KfEngine(c));
      };
      break;
    case FilterKind::Ekf:
      named.factory = [](const ScenarioConfig& c, int, RngStream) {
        return std::unique_ptr<FilterEngine>(new EkfEngine(c));
      };
      break;
    case FilterKind::Ukf:
      named.factory = [options](const ScenarioConfig& c, int, RngStream) {
        return std::unique_ptr<FilterEngine>(new UkfEngine(c, options.ukf));
      };
      break;
    case FilterKind::Sif:
      named.factory = [options](const ScenarioConfig& c, int, RngStream rng) {
        return std::unique_ptr<FilterEngine>(new SifEngine(c, options, rng));
      };
      break;
    case FilterKind::SifSqrt:
      named.factory = [options](const ScenarioConfig& c, int, RngStream rng) {
        return std::unique_ptr<FilterEngine>(new SqrtSifEngine(c, options, rng));
      };
      break;
  }
  return named;
}

RngStream run_truth_stream(std::uint64_t seed, int run_index) {
  return RngStream(seed, static_cast<std::uint64_t>(run_index) * 8);
}

MetricsReport run_monte_carlo(const ScenarioConfig& config,
                              const std::vector<NamedEngine>& engines,
                              const BenchOptions& options) {
  if (engines.empty()) throw EmptyInput("run_monte_carlo: no filters selected");
  if (config.mc_runs < 1) throw std::invalid_argument("run_monte_carlo: mc_runs must be >= 1");

  const int runs = config.mc_runs;
  const auto n_filters = engines.size();
  const GaussianState prior = scenario_prior(config);
  std::vector<RunSlot> slots(static_cast<std::size_t>(runs) * n_filters);

  // Stream ids leave room for eight purposes per run: 0 is truth simulation,
  // 1 + slot is the filter in list order.
  auto process_run = [&](int r) {
    RngStream truth_rng = run_truth_stream(config.seed, r);
    const TrackRecord track = simulate_truth(config, truth_rng);
    for (std::size_t s = 0; s < n_filters; ++s) {
      RunSlot& slot = slots[static_cast<std::size_t>(r) * n_filters + s];
      auto engine = engines[s].factory(
          config, r, RngStream(config.seed, static_cast<std::uint64_t>(r) * 8 + 1 + s));
      const auto start = std::chrono::steady_clock::now();
      std::vector<GaussianState> estimates;
      estimates.reserve(track.truth.size());
      std::optional<std::vector<GaussianState>> smoothed;
      try {
        engine->initialize(prior);
        for (int k = 0; k <= config.horizon; ++k) {
          engine->step(track.measurements[k], k);
          estimates.push_back(engine->current());
        }
        if (options.smooth && engine->supports_smoothing()) {
          smoothed = engine->smooth_all();
        }
      } catch (const NotPositiveDefinite&) {
        slot.failed = true;
      } catch (const DowndateFailure&) {
        slot.failed = true;
      } catch (const InnovationCovSingular&) {
        slot.failed = true;
      } catch (const IntegrandFailure&) {
        slot.failed = true;
      }
      slot.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (slot.failed) continue;
      slot.filtered = score_track(track.truth, estimates, config.normalize_by_horizon);
      if (smoothed) {
        slot.smoothed =
            score_track(track.truth, *smoothed, config.normalize_by_horizon);
      }
    }
  };

  int thread_count = options.threads;
  if (thread_count == 0) {
    thread_count = static_cast<int>(std::thread::hardware_concurrency());
  }
  thread_count = std::max(1, std::min(thread_count, runs));

  if (thread_count == 1) {
    for (int r = 0; r < runs; ++r) process_run(r);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::atomic<int> next_run{0};
    for (int t = 0; t < thread_count; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const int r = next_run.fetch_add(1);
          if (r >= runs) return;
          try {
            process_run(r);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  // Reduction happens strictly in run order so the report does not depend on
  // the thread count.
  MetricsReport report;
  report.runs = runs;
  report.horizon = config.horizon;
  report.seed = config.seed;
  report.smoothing = options.smooth;
  const auto n_x = prior.mean.size();

  for (std::size_t s = 0; s < n_filters; ++s) {
    FilterMetrics fm;
    fm.name = engines[s].name;
    Eigen::VectorXd rmse_sum = Eigen::VectorXd::Zero(n_x);
    Eigen::VectorXd srmse_sum = Eigen::VectorXd::Zero(n_x);
    double anees_sum = 0.0, sanees_sum = 0.0, wall = 0.0;
    int included = 0, s_included = 0;
    for (int r = 0; r < runs; ++r) {
      const RunSlot& slot = slots[static_cast<std::size_t>(r) * n_filters + s];
      wall += slot.wall_seconds;
      if (slot.failed || slot.filtered.divergent) {
        ++fm.divergences;
        continue;
      }
      rmse_sum += slot.filtered.rmse;
      anees_sum += slot.filtered.anees;
      ++included;
      if (slot.smoothed && !slot.smoothed->divergent) {
        srmse_sum += slot.smoothed->rmse;
        sanees_sum += slot.smoothed->anees;
        ++s_included;
      }
    }
    fm.wall_seconds = wall;
    fm.rmse = included > 0 ? Eigen::VectorXd(rmse_sum / included)
                           : Eigen::VectorXd(Eigen::VectorXd::Constant(
                                 n_x, std::numeric_limits<double>::quiet_NaN()));
    fm.anees = included > 0 ? anees_sum / included
                            : std::numeric_limits<double>::quiet_NaN();
    if (s_included > 0) {
      fm.smoothed_rmse = srmse_sum / s_included;
      fm.smoothed_anees = sanees_sum / s_included;
    }
    report.filters.push_back(std::move(fm));
  }

  if (options.collect_per_run) {
    for (int r = 0; r < runs; ++r) {
      for (std::size_t s = 0; s < n_filters; ++s) {
        const RunSlot& slot = slots[static_cast<std::size_t>(r) * n_filters + s];
        if (slot.failed || slot.filtered.divergent) continue;
        auto emit = [&](const char* phase, const TrackMetrics& tm) {
          for (int k = 0; k <= config.horizon; ++k) {
            std::ostringstream row;
            row << r << ',' << engines[s].name << ',' << phase << ',' << k;
            for (Eigen::Index i = 0; i < n_x; ++i) {
              row << ',' << format_double(tm.step_se(k, i), 10);
            }
            row << ',' << format_double(tm.step_nees(k), 10);
            report.per_run_rows.push_back(row.str());
          }
        };
        emit("filtered", slot.filtered);
        if (slot.smoothed && !slot.smoothed->divergent) emit("smoothed", *slot.smoothed);
      }
    }
  }
  return report;
}

MetricsReport run_monte_carlo(const ScenarioConfig& config,
                              const std::vector<FilterKind>& kinds,
                              const BenchOptions& options) {
  std::vector<NamedEngine> engines;
  engines.reserve(kinds.size());
  for (FilterKind kind : kinds) engines.push_back(standard_engine(kind, options));
  return run_monte_carlo(config, engines, options);
}

std::string metrics_to_text(const MetricsReport& report) {
  std::ostringstream out;
  out << "runs: " << report.runs << "  horizon: " << report.horizon
      << "  seed: " << report.seed << "\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-14s %9s %9s %9s %9s %9s %9s %9s\n", "filter",
                "rmse_px", "rmse_vx", "rmse_py", "rmse_vy", "anees", "diverged",
                "wall_s");
  out << line;
  auto emit = [&](const std::string& name, const Eigen::VectorXd& rmse, double anees,
                  int div, double wall) {
    std::snprintf(line, sizeof(line),
                  "%-14s %9.4f %9.4f %9.4f %9.4f %9.4f %9d %9.2f\n", name.c_str(),
                  rmse(0), rmse.size() > 1 ? rmse(1) : 0.0,
                  rmse.size() > 2 ? rmse(2) : 0.0, rmse.size() > 3 ? rmse(3) : 0.0,
                  anees, div, wall);
    out << line;
  };
  for (const auto& fm : report.filters) {
    emit(fm.name, fm.rmse, fm.anees, fm.divergences, fm.wall_seconds);
    if (fm.smoothed_rmse) {
      emit(fm.name + "+smooth", *fm.smoothed_rmse, *fm.smoothed_anees, fm.divergences,
           fm.wall_seconds);
    }
  }
  return out.str();
}

std::string metrics_to_json(const MetricsReport& report) {
  nlohmann::json root;
  root["runs"] = report.runs;
  root["horizon"] = report.horizon;
  root["seed"] = report.seed;
  root["smoothing"] = report.smoothing;
  nlohmann::json filters = nlohmann::json::array();
  for (const auto& fm : report.filters) {
    nlohmann::json entry;
    entry["name"] = fm.name;
    std::vector<double> rmse(fm.rmse.data(), fm.rmse.data() + fm.rmse.size());
    for (auto& v : rmse) v = round4(v);
    entry["rmse"] = rmse;
    entry["anees"] = round4(fm.anees);
    entry["divergences"] = fm.divergences;
    if (fm.smoothed_rmse) {
      std::vector<double> srmse(fm.smoothed_rmse->data(),
                                fm.smoothed_rmse->data() + fm.smoothed_rmse->size());
      for (auto& v : srmse) v = round4(v);
      entry["smoothed_rmse"] = srmse;
      entry["smoothed_anees"] = round4(*fm.smoothed_anees);
    }
    filters.push_back(std::move(entry));
  }
  root["filters"] = std::move(filters);
  return root.dump(2) + "\n";
}

std::string metrics_to_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "filter,rmse_px,rmse_vx,rmse_py,rmse_vy,anees,divergences\n";
  auto emit = [&](const std::string& name, const Eigen::VectorXd& rmse, double anees,
                  int div) {
    out << name;
    for (Eigen::Index i = 0; i < rmse.size(); ++i) {
      out << ',' << format_double(round4(rmse(i)), 10);
    }
    out << ',' << format_double(round4(anees), 10) << ',' << div << "\n";
  };
  for (const auto& fm : report.filters) {
    emit(fm.name, fm.rmse, fm.anees, fm.divergences);
    if (fm.smoothed_rmse) {
      emit(fm.name + "+smooth", *fm.smoothed_rmse, *fm.smoothed_anees, fm.divergences);
    }
  }
  return out.str();
}

std::string per_run_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "run,filter,phase,k,se_px,se_vx,se_py,se_vy,nees\n";
  for (const auto& row : report.per_run_rows) out << row << "\n";
  return out.str();
}

}  // namespace sif
