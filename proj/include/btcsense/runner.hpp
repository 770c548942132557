#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

// Declarative experiment runs: YAML spec in, CSV table plus JSON sidecar out.
namespace btc::runner {

enum class Experiment {
  QfiScan,
  HomodyneScan,
  AbsorberScan,
  Scaling,
  PhaseDiagram,
  MeanField,
  SuperspinBenchmark,
};

const char* to_string(Experiment e);
std::optional<Experiment> experiment_from_string(const std::string& name);
std::vector<std::string> experiment_names();

struct Tolerances {
  double eigen_tol = 1e-9;
  double h_s = 1e-3;
  double h_phi = 1e-3;
  double near_critical = 0.05;
};

struct RunSpec {
  std::optional<Experiment> experiment;
  std::string name;  // output file stem; defaults to the experiment name

  // parameter ranges (the grid is their Cartesian product)
  std::vector<int> N;
  std::vector<double> omega_ratio;
  std::vector<double> dphi;
  std::vector<double> phase_offset;
  double kappa = 1.0;

  std::string quantity = "absorber";  // scaling: absorber | qfi
  std::string method = "both";        // qfi-scan: spectral | correlation | both
  double t_end = 200.0;               // meanfield
  double dt = 1e-3;
  bool trajectory = false;
  int sample_every = 100;
  double tau_max = 4.0;  // superspin-benchmark
  int tau_points = 41;

  Tolerances tol;
  std::string canonical;  // normalized spec text, input of the spec hash
};

/// Parses YAML text and applies `key.path=value` overrides (values are YAML).
/// Parse problems are appended to `errors`; the returned spec is only
/// meaningful when `errors` stays empty.
RunSpec parse_spec(const std::string& yaml_text, const std::vector<std::string>& overrides,
                   std::vector<std::string>& errors);

/// Pure validation; every message names its field.
std::vector<std::string> validate(const RunSpec& spec);

using Cell = std::variant<double, long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct FlaggedRow {
  std::size_t row = 0;
  std::string params;
  std::vector<std::string> flags;
};

struct RunOutput {
  Table table;
  std::optional<Table> trajectory;  // meanfield with trajectory: true
  std::vector<FlaggedRow> flagged;
};

/// Runs a validated spec on `workers` threads. Row order follows the
/// parameter grid, independent of scheduling.
RunOutput execute(const RunSpec& spec, int workers);

/// Full-precision CSV (17 significant digits, LF endings).
std::string to_csv(const Table& t);

/// 64-bit FNV-1a of the text, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

/// Validates, runs and writes <out>/<name>.csv and <out>/<name>.json.
/// Returns 0 on success, 1 on validation failure (nothing written), 2 when
/// rows carry flags or errors.
int run(const RunSpec& spec, const std::string& out_dir, int workers, std::ostream& log);

/// Runs every *.yaml spec in `config_dir` in name order. Exit code is the
/// maximum over the individual runs.
int repro(const std::string& config_dir, const std::string& out_dir, int workers,
          std::ostream& log);

}  // namespace btc::runner
