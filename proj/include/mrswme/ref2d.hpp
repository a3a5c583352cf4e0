/// @file ref2d.hpp
/// @brief Vertically resolved (y, zeta) magnetic rotating shallow water
/// reference solver.
///
///   U_t + G(U)_y + H(U)_zeta = Q(U) [ (hb)_y + (hC)_zeta ] + S(U),
///   U = (h, hu, hv, ha, hb),  Q(U) = -(0, a, b, u, v)
///
/// discretized with the PCCU scheme, plus an auxiliary evolved field
/// B ~ (hb)_y that drives a locally divergence-free reconstruction of hb and
/// of the magnetic vertical coupling hC.
#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "mrswme/fv1d.hpp"
#include "mrswme/model1d.hpp"

namespace mrswme {

struct Grid2D {
  double y_min = 0.0;
  double y_max = 1.0;
  int n_y = 4;
  int n_zeta = 4;
  Boundary boundary = Boundary::periodic;

  double dy() const { return (y_max - y_min) / n_y; }
  double dzeta() const { return 1.0 / n_zeta; }
  double y_center(int j) const { return y_min + (j + 0.5) * dy(); }
  double zeta_center(int k) const { return (k + 0.5) * dzeta(); }
  void validate() const;
};

/// Cell (j,k) stores (h, hu, hv, ha, hb) at u[5*(j*n_zeta + k) ...] and the
/// divergence field at B[j*n_zeta + k].
struct RefState2D {
  Grid2D grid;
  double time = 0.0;
  std::vector<double> u;
  std::vector<double> B;

  RefState2D() = default;
  explicit RefState2D(const Grid2D& g);

  std::size_t index(int j, int k) const { return static_cast<std::size_t>(j) * grid.n_zeta + k; }
  std::span<double> cell(int j, int k) { return {u.data() + 5 * index(j, k), 5}; }
  std::span<const double> cell(int j, int k) const { return {u.data() + 5 * index(j, k), 5}; }
};

using Vec5 = std::array<double, 5>;

/// G = (hv, huv - hab, hv^2 + g h^2/2 - hb^2, hav - hbu, 0).
Vec5 flux_y(std::span<const double> u, double g);
/// H = (h w, hu w - ha C, hv w - hb C, ha w - hu C, hb w - hv C).
Vec5 flux_zeta(std::span<const double> u, double omega, double c);

/// Vertical velocity coupling of one column. d[k] is the y-divergence
/// (G^h_{j+1/2,k} - G^h_{j-1/2,k}) / dy of cell k, h_up[k] and h_down[k] the
/// upper and lower face depths. Returns omega at the n+1 zeta-interfaces,
/// zero at both ends.
std::vector<double> coupling_omega(std::span<const double> d, std::span<const double> h_up,
                                   std::span<const double> h_down, double dzeta, double h_min);

/// Magnetic vertical coupling of one column from the limited slopes sigma*B.
struct CouplingC {
  std::vector<double> center;
  std::vector<double> up;
  std::vector<double> down;
};
CouplingC coupling_C(std::span<const double> sigma_b, double dzeta);

/// sigma = min(1, slope/B) when slope and B share a sign, else 0.
double divergence_limiter(double minmod_slope, double b);

struct RefOptions {
  double g = 1.0;
  ScalarField coriolis = [](double) { return 0.0; };
  ScalarField bathymetry_slope = [](double) { return 0.0; };
  double h_min = 1e-10;
  double theta = 1.3;
  double cfl = 0.45;
  double dt_max = 0.1;
};

struct RefStats {
  long steps = 0;
  long clipped_slopes = 0;
  double last_dt = 0.0;
  /// Largest |slope_y(hb) + slope_zeta(hC)| seen, and the same divided by
  /// max|B| at that evaluation (0 when B vanishes identically).
  double max_div_residual = 0.0;
  double max_div_ratio = 0.0;
};

/// Per-evaluation data of the semi-discretization, kept for diagnostics and
/// tests. Arrays over real cells use the RefState2D cell index.
struct RefDiagnostics {
  std::vector<double> omega;  // n_y * (n_zeta + 1)
  std::vector<double> hc_center, hc_up, hc_down;
  std::vector<double> sigma_b;
  std::vector<double> hb_face_n, hb_face_s;
  double max_speed_y = 0.0;
  double max_speed_zeta = 0.0;
  double div_residual = 0.0;
  double max_abs_b = 0.0;
};

class RefSolver {
 public:
  RefSolver(RefOptions options, Grid2D grid);

  const Grid2D& grid() const { return grid_; }
  const RefOptions& options() const { return opt_; }
  const RefStats& stats() const { return stats_; }

  /// Time derivatives of U and B.
  RefDiagnostics rhs(const RefState2D& s, std::vector<double>& du, std::vector<double>& db);

  /// CFL bound min(nu dy / max y-speed, nu dzeta / max zeta-speed), capped at dt_max.
  double cfl_dt(const RefState2D& s);
  void step(RefState2D& s, double dt);
  void advance(RefState2D& s, double t_final);
  void advance_fixed(RefState2D& s, double dt, int n_steps);

  /// B set to the limited y-slope of hb (the initial condition for B).
  void init_divergence_field(RefState2D& s) const;

 private:
  double dt_from(const RefDiagnostics& d) const;
  void finish_step(RefState2D& s, const std::vector<double>& du0, const std::vector<double>& db0,
                   double dt);
  void check_state(const RefState2D& s, const char* stage) const;

  RefOptions opt_;
  Grid2D grid_;
  RefStats stats_;
};

/// Mass-weighted vertical averages per column.
struct DepthAverage {
  std::vector<double> y, h, u_m, v_m, a_m, b_m;
};
DepthAverage depth_average(const RefState2D& s);

/// Primitive values of the column nearest y0. On a cell boundary the lower
/// index is used.
struct ProfileSlice {
  int j = 0;
  double y = 0.0;
  std::vector<double> zeta, h, u, v, a, b;
};
int slice_column(const Grid2D& g, double y0);
ProfileSlice profile_slice(const RefState2D& s, double y0);

/// CSV y,zeta,h,u,v,a,b
void write_reference_csv(std::ostream& os, const RefState2D& s);
/// CSV y,h,u_m,v_m,a_m,b_m
void write_depth_average_csv(std::ostream& os, const DepthAverage& d);

}  // namespace mrswme
