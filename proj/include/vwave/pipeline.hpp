#pragma once

// Run configuration, the end-to-end pipeline behind the command line tool,
// and re-projection of a finished run into flat plotting files.

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace vwave {

struct RunConfig {
  struct Scenario {
    std::string name = "linear";  // linear | liquid-crystal | x-heterogeneous
    double alpha = 1.0, beta = 0.0, gamma = 1.0;
    double K1 = 1.0, K2 = 4.0;
    double g0 = 1.0, eps = 0.2, k = 6.283185307179586;
  } scenario;

  struct Data {
    std::string source = "pulse";  // pulse | hat-steep | gauss | zero | file
    std::string path;              // JSON initial data when source = file
  } data;

  double T = 1.0;
  double h = 0.01;
  double dx = 0.0;  // oracle spacing; 0 means h
  double dt = 0.0;  // trace step; 0 means h
  std::string output_dir = "run";
  int isochrones = 10;  // slices at T k / isochrones, k = 0..isochrones
  int paths = 3;        // traced starts per family
  int curve_resolution = 64;
  int threads = 1;
  long seed = 0;  // reserved: nothing in the pipeline is random

  struct Checks {
    bool oracle_compare = false;
    bool trace = true;
    bool holder = true;
    bool balance = true;
  } checks;

  struct Tolerances {
    double drift = 1e-3;          // max |E(t) - E0| / E0
    double oracle_rel_l2 = 1e-2;  // relative L2 of u against the FD oracle
    double trace_coeff = 50.0;    // sup |x_path - x_line| <= trace_coeff (h^2 + dt^2)
    double speed_slack = 1e-2;    // relative slack on N_lower <= |dx/dt| <= N_upper
    double holder_min = 0.45;     // smallest accepted exponent
    double balance = 1e-3;        // |residual| / max(E0, 1)
    double structure = 1e-10;     // slack in Q <= E0^2
    double eps_conc = 1e-6;
    double cell_tol = 1e-12;
    int cell_max_iter = 60;
    double fd_cfl = 0.5;
    double fd_blowup_cap = 1e6;
  } tol;

  /// Throws ConfigError on invalid values.
  void validate() const;
};

/// Sets one dotted key ("run.T", "checks.trace", "tolerances.drift", ...)
/// from its textual value. Throws ConfigError.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// TOML-style text: `[section]` headers, `key = value` lines, `#` comments.
/// Text starting with `{` is read as JSON instead. Throws ConfigError.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Every key with its effective value; parse_config(to_json(c).dump())
/// reproduces c.
nlohmann::json to_json(const RunConfig& cfg);

struct CheckResult {
  std::string name;
  bool passed = true;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct RunResult {
  std::vector<CheckResult> checks;
  std::size_t events = 0;
  double E0 = 0.0;
  double max_drift = 0.0;

  bool passed() const;
};

/// Solves, diagnoses and writes every artifact into cfg.output_dir:
/// config.json, grid.csv + grid.json, isochrone_<k>.csv, diagnostics.json,
/// path_<family>_<k>.csv, oracle.csv (when enabled), manifest.json and
/// summary.txt.
RunResult run_pipeline(const RunConfig& cfg);

enum class PlotKind { energy, isochrone, paths };

/// Writes plot_<kind>.csv into run_dir and returns its path. Throws
/// MissingArtifacts when the run directory is incomplete.
std::string emit_plotdata(const std::string& run_dir, PlotKind kind);

}  // namespace vwave
