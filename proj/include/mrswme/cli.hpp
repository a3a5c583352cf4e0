/// @file cli.hpp
/// @brief Run configuration, validation and orchestration behind the
/// command-line front end.
///
/// Configuration is a flat JSON object. Keys:
///   mode            run-moment | run-reference | compare | hyperbolicity-scan | tensors
///   example, case   experiment id 1..4 and profile case
///   order           moment order for run-moment and tensors
///   orders          moment orders for compare
///   n_y, n_zeta, cfl, theta, g, dt_max, tol_im
///   final_time, snapshot_times, profile_y
///   b_range, beta_range, eta_range, resolution, gh   (hyperbolicity-scan)
///   format          csv | json (tensors)
///   out             output root
/// Unknown keys are rejected.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrswme/experiments.hpp"

namespace mrswme {

inline constexpr const char* kCodeVersion = "0.1.0";

enum class Mode { run_moment, run_reference, compare, hyperbolicity_scan, tensors };

Mode parse_mode(const std::string& name);
std::string to_string(Mode m);

struct RunConfig {
  Mode mode = Mode::compare;
  int example = 1;
  std::string profile_case = "constant";
  int order = 0;
  std::vector<int> orders = {0, 1, 2, 3};

  // unset values keep the example defaults
  std::optional<int> n_y, n_zeta;
  std::optional<double> cfl, theta, g, dt_max, tol_im, final_time;
  std::optional<std::vector<double>> snapshot_times, profile_y;

  std::array<double, 2> b_range = {-5.0, 5.0};
  std::array<double, 2> beta_range = {-10.0, 10.0};
  std::array<double, 2> eta_range = {-10.0, 10.0};
  std::array<int, 3> resolution = {51, 51, 51};
  double gh = 1.0;

  std::string format = "csv";
  std::filesystem::path out = "runs";
};

/// Parses and validates a configuration document. Throws ConfigError naming
/// the offending key.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config(const std::string& text);

/// Sets doc[key] from "key=value". The value is read as JSON when it parses
/// (numbers, lists), as a bracketed list when it is comma separated, and as
/// a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& key_value);

/// Effective configuration, with example defaults filled in where the
/// config leaves them unset.
nlohmann::json to_json(const RunConfig& c);

/// Example defaults with the config's overrides applied, validated.
ExperimentSpec experiment_spec(const RunConfig& c);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& p);

struct RunResult {
  int exit_code = 0;
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> files;
};

/// Executes the configured mode and writes manifest.json next to its
/// artifacts. Failures are reported on err as one line
///   error code=<n> kind=<config|solver|hyperbolicity|io> message="..."
/// and the matching exit code (2 config, 3 solver, 4 hyperbolicity, 1 other).
RunResult run(const RunConfig& c, std::ostream& err);

/// Writes A, B, Gamma and phi(1) of order M as CSV files or one JSON file
/// into dir; returns the written paths.
std::vector<std::filesystem::path> write_tensors(int order, const std::string& format,
                                                 const std::filesystem::path& dir);

}  // namespace mrswme
