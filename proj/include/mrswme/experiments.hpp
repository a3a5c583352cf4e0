/// @file experiments.hpp
/// @brief The four numerical experiments, L1 comparisons of moment runs
/// against depth-averaged reference runs, and their CSV output.
///
/// Output layout below an output root:
///   ex<id>/<case>/M<order>/snapshot_t<t>.csv, profiles_y<y0>.csv
///   ex<id>/<case>/reference/snapshot_t<t>.csv, depth_average_t<t>.csv, profiles_y<y0>.csv
///   ex<id>/<case>/errors.csv
#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "mrswme/fv1d.hpp"
#include "mrswme/model1d.hpp"
#include "mrswme/ref2d.hpp"

namespace mrswme {

/// Primitive (h, u, v, a, b) at (y, zeta).
using PrimitiveField = std::function<std::array<double, 5>(double, double)>;
/// Conservative moment state of order M at y, written into out (size 5 + 4M).
using MomentField = std::function<void(double, int, std::span<double>)>;

struct ExperimentSpec {
  int id = 1;
  std::string profile_case = "constant";

  double y_min = -1.0;
  double y_max = 1.0;
  int n_y = 200;
  int n_zeta = 100;
  Boundary boundary = Boundary::periodic;

  double cfl = 0.45;
  double theta = 1.3;
  double g = 1.0;
  double dt_max = 0.1;
  double tol_im = 0.1;
  ScalarField coriolis = [](double) { return 0.0; };
  ScalarField bathymetry = [](double) { return 0.0; };
  ScalarField bathymetry_slope = [](double) { return 0.0; };

  /// Ascending; the last entry is the final time.
  std::vector<double> snapshot_times = {2.0};
  std::vector<double> profile_y;

  PrimitiveField reference_initial;
  MomentField moment_initial;

  double final_time() const { return snapshot_times.back(); }
  std::string label() const { return "ex" + std::to_string(id) + "/" + profile_case; }
};

/// Example defaults. Throws ConfigError for an unknown id or an id/case pair
/// that the example does not define.
ExperimentSpec make_experiment(int id, const std::string& profile_case);
/// Checks ranges of the numerical parameters; throws ConfigError.
void validate(const ExperimentSpec& spec);

Grid1D moment_grid(const ExperimentSpec& spec);
Grid2D reference_grid(const ExperimentSpec& spec);
ModelParams model_params(const ExperimentSpec& spec, int order);
Fv1dOptions fv1d_options(const ExperimentSpec& spec);
RefOptions ref_options(const ExperimentSpec& spec);

/// Cell averages by midpoint sampling.
Solution1D initial_moment(const ExperimentSpec& spec, int order);
/// Midpoint sampling in y and zeta, B from the limited y-slope of hb.
RefState2D initial_reference(const ExperimentSpec& spec);

struct ExampleSetup {
  ExperimentSpec spec;
  Solution1D moment;
  RefState2D reference;
};
ExampleSetup build_example(int id, const std::string& profile_case, int order);

/// sum_j |a_j - b_j| dy. Throws std::invalid_argument on size mismatch.
double l1_error(std::span<const double> a, std::span<const double> b, double dy);

/// Depth-averaged primitive variables of a moment solution, same layout as
/// the reference depth average.
DepthAverage moment_means(const Solution1D& sol);

struct RunSummary {
  std::string label;
  long steps = 0;
  long clipped_slopes = 0;
  double max_im_ratio = 0.0;
  double max_div_ratio = 0.0;
  double wall_seconds = 0.0;
};

struct MomentRun {
  Solution1D solution;
  RunSummary summary;
};
struct ReferenceRun {
  RefState2D state;
  RunSummary summary;
};

/// Runs to each snapshot time. When out_root is non-empty, snapshots and
/// profile slices go to the documented layout and the written file paths are
/// appended to files.
MomentRun run_moment(const ExperimentSpec& spec, int order, const std::filesystem::path& out_root = {},
                     std::vector<std::filesystem::path>* files = nullptr);
ReferenceRun run_reference(const ExperimentSpec& spec, const std::filesystem::path& out_root = {},
                           std::vector<std::filesystem::path>* files = nullptr);

struct ErrorRow {
  int order = 0;
  std::string var;
  double l1 = 0.0;
};

struct ErrorReport {
  std::vector<ErrorRow> rows;
  /// L1 error of variable var at order M; throws std::out_of_range if absent.
  double at(int order, const std::string& var) const;
};

/// Variables compared: h, u_m, v_m, a_m, b_m.
ErrorReport compare_means(const DepthAverage& reference, const Solution1D& sol, double dy);

struct Comparison {
  ErrorReport errors;
  std::vector<RunSummary> runs;
  std::vector<std::filesystem::path> files;
};

/// One reference run and one moment run per order, errors at the final time.
/// A failing moment run is rethrown with its order in the message.
Comparison run_comparison(const ExperimentSpec& spec, const std::vector<int>& orders,
                          const std::filesystem::path& out_root = {});

/// CSV M,var,l1
void write_errors_csv(std::ostream& os, const ErrorReport& r);

/// Shortest decimal text that reads back to t ("1.5", "10", "-0.4").
std::string format_label(double x);

/// max over zeta of |b - b_m| / |b_m| in the column at y0, b_m the
/// mass-weighted column mean.
double relative_b_perturbation(const RefState2D& s, double y0);

}  // namespace mrswme
