#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sif/bench.hpp"
#include "sif/scenario.hpp"

namespace sif {

enum class OutputFormat { Text, Json, Csv };

std::string format_name(OutputFormat format);
std::optional<OutputFormat> parse_output_format(const std::string& name);

/// Everything one benchmark invocation needs. Defaults reproduce the standard
/// bearing-range tracking study.
struct RunSpec {
  ScenarioConfig scenario;
  std::vector<FilterKind> filters{FilterKind::Ekf, FilterKind::Ukf, FilterKind::Sif};
  bool smooth = false;
  /// Promote plain "sif" entries to their square-root form.
  bool sqrt_form = false;
  SirConfig sir{};
  UkfParams ukf{0.5, 2.0, -1.0};
  int threads = 1;
  std::string out_dir = "sif_out";
  OutputFormat format = OutputFormat::Text;
};

/// Read a flat key = value configuration file ([scenario], [run], [ukf]
/// sections) into an existing spec. Unknown sections or keys raise
/// ConfigParseError with the offending line number.
void apply_config_file(RunSpec& spec, const std::string& path);

/// Check every invariant without running anything; returns one human-readable
/// diagnostic per violation, empty when the spec is runnable.
std::vector<std::string> validate(const RunSpec& spec);

/// Execute the Monte-Carlo study described by the spec: writes summary.txt
/// and summary.json (plus per_run.csv for the csv format) into spec.out_dir
/// and renders the summary to `out`. Returns 0 on success, 1 for an invalid
/// spec (diagnostics go to `diag`), 2 for runtime failures.
int run(const RunSpec& spec, std::ostream& out, std::ostream& diag);

}  // namespace sif
