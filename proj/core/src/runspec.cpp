#include "sif/runspec.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "sif/errors.hpp"

namespace sif {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail_at(const std::string& path, int line, const std::string& what) {
  throw ConfigParseError(path + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& path, int line, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    fail_at(path, line, "expected a number, got '" + text + "'");
  }
}

long long parse_int(const std::string& path, int line, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    fail_at(path, line, "expected an integer, got '" + text + "'");
  }
}

bool parse_bool(const std::string& path, int line, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  fail_at(path, line, "expected a boolean, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Eigen::VectorXd parse_vector(const std::string& path, int line, const std::string& text,
                             int expected) {
  const auto parts = split_list(text);
  if (static_cast<int>(parts.size()) != expected) {
    fail_at(path, line, "expected " + std::to_string(expected) + " comma-separated values");
  }
  Eigen::VectorXd v(expected);
  for (int i = 0; i < expected; ++i) v(i) = parse_double(path, line, parts[i]);
  return v;
}

void apply_scenario_key(RunSpec& spec, const std::string& path, int line,
                        const std::string& key, const std::string& value) {
  ScenarioConfig& sc = spec.scenario;
  if (key == "t_step") {
    sc.t_step = parse_double(path, line, value);
  } else if (key == "horizon") {
    sc.horizon = static_cast<int>(parse_int(path, line, value));
  } else if (key == "q1") {
    sc.q1 = parse_double(path, line, value);
  } else if (key == "q2") {
    sc.q2 = parse_double(path, line, value);
  } else if (key == "bearing_variance") {
    sc.bearing_variance = parse_double(path, line, value);
  } else if (key == "range_variance") {
    sc.range_variance = parse_double(path, line, value);
  } else if (key == "radar_position") {
    sc.radar_position = parse_vector(path, line, value, 2);
  } else if (key == "initial_mean") {
    sc.initial_mean = parse_vector(path, line, value, 4);
  } else if (key == "initial_variances") {
    sc.initial_variances = parse_vector(path, line, value, 4);
  } else if (key == "measurement") {
    if (value == "bearing-range") {
      sc.linear_measurement = false;
    } else if (value == "linear") {
      sc.linear_measurement = true;
    } else {
      fail_at(path, line, "measurement must be 'bearing-range' or 'linear'");
    }
  } else if (key == "normalize_by_horizon") {
    sc.normalize_by_horizon = parse_bool(path, line, value);
  } else {
    fail_at(path, line, "unknown scenario key '" + key + "'");
  }
}

void apply_run_key(RunSpec& spec, const std::string& path, int line,
                   const std::string& key, const std::string& value) {
  if (key == "filters") {
    std::vector<FilterKind> kinds;
    for (const auto& name : split_list(value)) {
      const auto kind = parse_filter_kind(name);
      if (!kind) fail_at(path, line, "unknown filter '" + name + "'");
      kinds.push_back(*kind);
    }
    spec.filters = std::move(kinds);
  } else if (key == "mc_runs") {
    spec.scenario.mc_runs = static_cast<int>(parse_int(path, line, value));
  } else if (key == "seed") {
    spec.scenario.seed = static_cast<std::uint64_t>(parse_int(path, line, value));
  } else if (key == "smooth") {
    spec.smooth = parse_bool(path, line, value);
  } else if (key == "sqrt") {
    spec.sqrt_form = parse_bool(path, line, value);
  } else if (key == "nmax") {
    spec.sir.max_iterations = static_cast<int>(parse_int(path, line, value));
  } else if (key == "eps_min") {
    spec.sir.error_tolerance = parse_double(path, line, value);
  } else if (key == "threads") {
    spec.threads = static_cast<int>(parse_int(path, line, value));
  } else if (key == "out") {
    spec.out_dir = value;
  } else if (key == "format") {
    const auto format = parse_output_format(value);
    if (!format) fail_at(path, line, "format must be text, json, or csv");
    spec.format = *format;
  } else {
    fail_at(path, line, "unknown run key '" + key + "'");
  }
}

void apply_ukf_key(RunSpec& spec, const std::string& path, int line,
                   const std::string& key, const std::string& value) {
  if (key == "alpha") {
    spec.ukf.alpha = parse_double(path, line, value);
  } else if (key == "beta") {
    spec.ukf.beta = parse_double(path, line, value);
  } else if (key == "kappa") {
    spec.ukf.kappa = parse_double(path, line, value);
  } else {
    fail_at(path, line, "unknown ukf key '" + key + "'");
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::string format_name(OutputFormat format) {
  switch (format) {
    case OutputFormat::Text: return "text";
    case OutputFormat::Json: return "json";
    case OutputFormat::Csv: return "csv";
  }
  return "text";
}

std::optional<OutputFormat> parse_output_format(const std::string& name) {
  if (name == "text") return OutputFormat::Text;
  if (name == "json") return OutputFormat::Json;
  if (name == "csv") return OutputFormat::Csv;
  return std::nullopt;
}

void apply_config_file(RunSpec& spec, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError(path + ": cannot open file");
  std::string section;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto comment = raw.find_first_of("#;");
    if (comment != std::string::npos) raw.erase(comment);
    const std::string text = trim(raw);
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') fail_at(path, line, "unterminated section header");
      section = trim(text.substr(1, text.size() - 2));
      if (section != "scenario" && section != "run" && section != "ukf") {
        fail_at(path, line, "unknown section '" + section + "'");
      }
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) fail_at(path, line, "expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) fail_at(path, line, "empty key");
    if (section == "scenario") {
      apply_scenario_key(spec, path, line, key, value);
    } else if (section == "run") {
      apply_run_key(spec, path, line, key, value);
    } else if (section == "ukf") {
      apply_ukf_key(spec, path, line, key, value);
    } else {
      fail_at(path, line, "key outside any section");
    }
  }
}

std::vector<std::string> validate(const RunSpec& spec) {
  std::vector<std::string> problems;
  const ScenarioConfig& sc = spec.scenario;
  if (sc.mc_runs < 1) problems.push_back("mc_runs must be at least 1");
  if (sc.horizon < 1) problems.push_back("horizon must be at least 1");
  if (!(sc.t_step > 0.0)) problems.push_back("t_step must be positive");
  if (sc.q1 < 0.0 || sc.q2 < 0.0) problems.push_back("process noise intensities must be nonnegative");
  if (!sc.linear_measurement) {
    if (!(sc.bearing_variance > 0.0)) problems.push_back("bearing_variance must be positive");
    if (!(sc.range_variance > 0.0)) problems.push_back("range_variance must be positive");
  }
  if (sc.initial_mean.size() != 4) problems.push_back("initial_mean must have 4 components");
  if (sc.initial_variances.size() != 4) {
    problems.push_back("initial_variances must have 4 components");
  } else if (sc.initial_variances.minCoeff() < 0.0) {
    problems.push_back("initial_variances must be nonnegative");
  }
  if (sc.radar_position.size() != 2) problems.push_back("radar_position must have 2 components");

  if (spec.filters.empty()) problems.push_back("at least one filter must be selected");
  const bool wants_kf =
      std::find(spec.filters.begin(), spec.filters.end(), FilterKind::Kf) != spec.filters.end();
  if (wants_kf && !sc.linear_measurement) {
    problems.push_back("kf requires the linear measurement variant");
  }
  const bool wants_ukf =
      std::find(spec.filters.begin(), spec.filters.end(), FilterKind::Ukf) != spec.filters.end();
  if (wants_ukf) {
    if (!(spec.ukf.alpha > 0.0) || spec.ukf.alpha > 1.0) {
      problems.push_back("ukf alpha must lie in (0, 1]");
    } else {
      const double n = 4.0;
      const double spread = spec.ukf.alpha * spec.ukf.alpha * (n + spec.ukf.kappa);
      if (!(spread > 0.0)) problems.push_back("ukf scaling gives a nonpositive sigma spread");
    }
  }

  if (spec.sir.max_iterations < 1) problems.push_back("nmax must be at least 1");
  if (spec.sir.error_tolerance < 0.0) problems.push_back("eps_min must be nonnegative");
  if (spec.threads < 0) problems.push_back("threads must be nonnegative");
  if (spec.out_dir.empty()) problems.push_back("output directory must not be empty");
  return problems;
}

int run(const RunSpec& spec, std::ostream& out, std::ostream& diag) {
  const auto problems = validate(spec);
  if (!problems.empty()) {
    for (const auto& p : problems) diag << "invalid: " << p << '\n';
    return 1;
  }

  std::vector<FilterKind> kinds;
  for (FilterKind kind : spec.filters) {
    if (spec.sqrt_form && kind == FilterKind::Sif) kind = FilterKind::SifSqrt;
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) kinds.push_back(kind);
  }

  BenchOptions options;
  options.smooth = spec.smooth;
  options.sir = spec.sir;
  options.ukf = spec.ukf;
  options.threads = spec.threads;
  options.collect_per_run = spec.format == OutputFormat::Csv;

  MetricsReport report;
  try {
    report = run_monte_carlo(spec.scenario, kinds, options);
  } catch (const std::exception& e) {
    diag << "run failed: " << e.what() << '\n';
    return 2;
  }

  try {
    const std::filesystem::path dir(spec.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "summary.txt", metrics_to_text(report));
    write_file(dir / "summary.json", metrics_to_json(report));
    if (options.collect_per_run) write_file(dir / "per_run.csv", per_run_csv(report));
  } catch (const std::exception& e) {
    diag << "cannot write artifacts: " << e.what() << '\n';
    return 2;
  }

  switch (spec.format) {
    case OutputFormat::Text: out << metrics_to_text(report); break;
    case OutputFormat::Json: out << metrics_to_json(report); break;
    case OutputFormat::Csv: out << metrics_to_csv(report); break;
  }
  return 0;
}

}  // namespace sif
