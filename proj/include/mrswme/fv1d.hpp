/// @file fv1d.hpp
/// @brief Second-order path-conservative central-upwind (PCCU) finite volume
/// scheme for the 1-D moment system with SSP-RK3 time stepping.
#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mrswme/model1d.hpp"

namespace mrswme {

enum class Boundary { periodic, outflow };

Boundary parse_boundary(const std::string& name);
std::string to_string(Boundary b);

struct Grid1D {
  double y_min = 0.0;
  double y_max = 1.0;
  int n_cells = 4;
  Boundary boundary = Boundary::periodic;

  double dy() const { return (y_max - y_min) / n_cells; }
  double center(int j) const { return y_min + (j + 0.5) * dy(); }
  /// Throws std::invalid_argument on n_cells < 4 or an empty interval.
  void validate() const;
};

/// Cell averages, row-major: cell j occupies values[j*width .. (j+1)*width).
struct Solution1D {
  Grid1D grid;
  int width = 5;
  double time = 0.0;
  std::vector<double> values;

  Solution1D() = default;
  Solution1D(const Grid1D& g, int order);

  std::span<double> cell(int j) { return {values.data() + static_cast<std::size_t>(j) * width, static_cast<std::size_t>(width)}; }
  std::span<const double> cell(int j) const {
    return {values.data() + static_cast<std::size_t>(j) * width, static_cast<std::size_t>(width)};
  }
  /// Component k of every cell.
  std::vector<double> component(int k) const;
};

/// minmod of three arguments.
double minmod3(double z1, double z2, double z3);

/// Face values of the piecewise linear reconstruction. Index p runs over the
/// padded cells 0..n+3 (two ghosts per side); only 1..n+2 are filled.
struct Reconstruction {
  int width = 0;
  std::vector<double> south;
  std::vector<double> north;
  int clipped = 0;  // cells whose h-slope was zeroed to keep h above the floor

  std::span<const double> S(int p) const { return {south.data() + static_cast<std::size_t>(p) * width, static_cast<std::size_t>(width)}; }
  std::span<const double> N(int p) const { return {north.data() + static_cast<std::size_t>(p) * width, static_cast<std::size_t>(width)}; }
};

/// CU numerical flux (s+ G(ul) - s- G(ur))/(s+ - s-) + s+ s-/(s+ - s-) (ur - ul).
/// Returns zero when s+ = s- = 0.
void cu_flux(std::span<const double> g_left, std::span<const double> g_right,
             std::span<const double> u_left, std::span<const double> u_right, double s_minus,
             double s_plus, std::span<double> out);

/// Counters accumulated over a run.
struct RunStats {
  long steps = 0;
  long clipped_slopes = 0;
  double max_im_ratio = 0.0;
  double last_dt = 0.0;
};

struct Fv1dOptions {
  double theta = 1.3;
  double cfl = 0.45;
  double dt_max = 0.1;
};

class Fv1dSolver {
 public:
  Fv1dSolver(const MomentModel& model, Grid1D grid, Fv1dOptions options = {});

  const MomentModel& model() const { return model_; }
  const Grid1D& grid() const { return grid_; }
  const Fv1dOptions& options() const { return opt_; }
  const RunStats& stats() const { return stats_; }

  /// Padded copy of the cell averages with ghost cells filled.
  std::vector<double> padded(const Solution1D& sol) const;
  Reconstruction reconstruct(const Solution1D& sol) const;

  /// Q_j = int over the cell of Q(U~) U~_y for one cell's face values.
  void path_integral_cell(std::span<const double> u_s, std::span<const double> u_n,
                          std::span<double> out) const;
  /// Q_Upsilon along the straight path from u_l to u_r.
  void path_integral_interface(std::span<const double> u_l, std::span<const double> u_r,
                               std::span<double> out) const;

  /// Semi-discrete right-hand side. Returns the largest one-sided speed over
  /// all interfaces (for the CFL bound).
  double rhs(const Solution1D& sol, std::vector<double>& out);

  /// nu * dy / max speed, capped at dt_max.
  double cfl_dt(const Solution1D& sol);

  /// One SSP-RK3 step with a given dt.
  void step(Solution1D& sol, double dt);
  /// Steps until sol.time == t_final, dt from the CFL bound of each step.
  void advance(Solution1D& sol, double t_final);
  /// Exactly n steps of size dt.
  void advance_fixed(Solution1D& sol, double dt, int n_steps);

 private:
  double cfl_from_speed(double max_speed) const;
  void finish_step(Solution1D& sol, const std::vector<double>& l0, double dt);
  void check_solution(const Solution1D& sol, const char* stage) const;

  const MomentModel& model_;
  Grid1D grid_;
  Fv1dOptions opt_;
  RunStats stats_;
};

/// CSV header y,h,hu_m,hv_m,ha_m,hb_m,h_alpha_1,h_beta_1,h_gamma_1,h_eta_1,...
std::string snapshot_header(int order);
void write_snapshot_csv(std::ostream& os, const Solution1D& sol);

/// printf("%.17g")
std::string format_double(double x);

}  // namespace mrswme
