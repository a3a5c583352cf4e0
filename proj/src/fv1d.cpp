#include "mrswme/fv1d.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "mrswme/errors.hpp"
#include "mrswme/path_integral.hpp"

namespace mrswme {

Boundary parse_boundary(const std::string& name) {
  if (name == "periodic") return Boundary::periodic;
  if (name == "outflow") return Boundary::outflow;
  throw std::invalid_argument("unknown boundary '" + name + "' (expected periodic or outflow)");
}

std::string to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "outflow"; }

void Grid1D::validate() const {
  if (n_cells < 4) throw std::invalid_argument("grid needs at least 4 cells");
  if (!(y_max > y_min)) throw std::invalid_argument("grid needs y_max > y_min");
}

Solution1D::Solution1D(const Grid1D& g, int order)
    : grid(g), width(5 + 4 * order), values(static_cast<std::size_t>(g.n_cells) * width, 0.0) {}

std::vector<double> Solution1D::component(int k) const {
  std::vector<double> out(grid.n_cells);
  for (int j = 0; j < grid.n_cells; ++j) out[j] = values[static_cast<std::size_t>(j) * width + k];
  return out;
}

double minmod3(double z1, double z2, double z3) {
  if (z1 > 0.0 && z2 > 0.0 && z3 > 0.0) return std::min({z1, z2, z3});
  if (z1 < 0.0 && z2 < 0.0 && z3 < 0.0) return std::max({z1, z2, z3});
  return 0.0;
}

void cu_flux(std::span<const double> g_left, std::span<const double> g_right,
             std::span<const double> u_left, std::span<const double> u_right, double s_minus,
             double s_plus, std::span<double> out) {
  const double den = s_plus - s_minus;
  if (den == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double wl = s_plus / den, wr = s_minus / den, wd = s_plus * s_minus / den;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = wl * g_left[k] - wr * g_right[k] + wd * (u_right[k] - u_left[k]);
  }
}

Fv1dSolver::Fv1dSolver(const MomentModel& model, Grid1D grid, Fv1dOptions options)
    : model_(model), grid_(grid), opt_(options) {
  grid_.validate();
  if (!(opt_.theta >= 1.0 && opt_.theta <= 2.0)) throw std::invalid_argument("theta outside [1, 2]");
  if (!(opt_.cfl > 0.0 && opt_.cfl <= 0.5)) throw std::invalid_argument("CFL number outside (0, 0.5]");
}

std::vector<double> Fv1dSolver::padded(const Solution1D& sol) const {
  const int n = grid_.n_cells, w = sol.width;
  std::vector<double> p(static_cast<std::size_t>(n + 4) * w);
  for (int q = 0; q < n + 4; ++q) {
    int j = q - 2;
    if (grid_.boundary == Boundary::periodic) {
      j = ((j % n) + n) % n;
    } else {
      j = std::clamp(j, 0, n - 1);
    }
    std::copy_n(sol.values.begin() + static_cast<std::ptrdiff_t>(j) * w, w,
                p.begin() + static_cast<std::ptrdiff_t>(q) * w);
  }
  return p;
}

Reconstruction Fv1dSolver::reconstruct(const Solution1D& sol) const {
  const int n = grid_.n_cells, w = sol.width;
  const double th = opt_.theta;
  const double h_min = model_.params().h_min;
  const std::vector<double> p = padded(sol);
  Reconstruction r;
  r.width = w;
  r.south.assign(p.size(), 0.0);
  r.north.assign(p.size(), 0.0);
  std::vector<double> d(w);
  for (int q = 1; q <= n + 2; ++q) {
    const double* um = &p[static_cast<std::size_t>(q - 1) * w];
    const double* u0 = &p[static_cast<std::size_t>(q) * w];
    const double* up = &p[static_cast<std::size_t>(q + 1) * w];
    // d = slope * dy
    for (int k = 0; k < w; ++k) {
      d[k] = minmod3(th * (up[k] - u0[k]), 0.5 * (up[k] - um[k]), th * (u0[k] - um[k]));
    }
    if (u0[0] + 0.5 * d[0] <= h_min || u0[0] - 0.5 * d[0] <= h_min) {
      d[0] = 0.0;
      ++r.clipped;
      spdlog::debug("fv1d: h slope clipped in padded cell {}", q);
    }
    double* s = &r.south[static_cast<std::size_t>(q) * w];
    double* nn = &r.north[static_cast<std::size_t>(q) * w];
    for (int k = 0; k < w; ++k) {
      nn[k] = u0[k] + 0.5 * d[k];
      s[k] = u0[k] - 0.5 * d[k];
    }
  }
  return r;
}

void Fv1dSolver::path_integral_cell(std::span<const double> u_s, std::span<const double> u_n,
                                    std::span<double> out) const {
  path_integral_interface(u_s, u_n, out);
}

void Fv1dSolver::path_integral_interface(std::span<const double> u_l, std::span<const double> u_r,
                                         std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const PathWeights pw = path_weights(u_l[0], u_r[0]);
  for (const auto& t : model_.noncons_terms()) {
    const double jump = u_r[t.col] - u_l[t.col];
    if (jump == 0.0) continue;
    out[t.row] += t.coeff * jump * pw.ratio(u_l[t.chi], u_r[t.chi]);
  }
}

double Fv1dSolver::rhs(const Solution1D& sol, std::vector<double>& out) {
  const int n = grid_.n_cells, w = sol.width;
  const double dy = grid_.dy();
  const Reconstruction r = reconstruct(sol);
  stats_.clipped_slopes += r.clipped;

  // interface i sits between padded cells i+1 and i+2 (real cells i-1 and i)
  std::vector<double> flux(static_cast<std::size_t>(n + 1) * w);
  std::vector<double> qup(static_cast<std::size_t>(n + 1) * w);
  std::vector<double> wm(n + 1), wp(n + 1);
  std::vector<double> gl(w), gr(w);
  double max_speed = 0.0;
  for (int i = 0; i <= n; ++i) {
    const auto ul = r.N(i + 1);
    const auto ur = r.S(i + 2);
    LocalSpeeds s;
    try {
      s = model_.local_speeds(ul, ur);
    } catch (const HyperbolicityError& e) {
      throw HyperbolicityError(std::string(e.what()) + " at interface y = " +
                                   format_double(grid_.y_min + i * dy),
                               e.ratio());
    }
    stats_.max_im_ratio = std::max(stats_.max_im_ratio, s.im_ratio);
    max_speed = std::max({max_speed, s.s_plus, -s.s_minus});
    model_.flux(ul, gl);
    model_.flux(ur, gr);
    std::span<double> f(flux.data() + static_cast<std::size_t>(i) * w, w);
    cu_flux(gl, gr, ul, ur, s.s_minus, s.s_plus, f);
    path_integral_interface(ul, ur, std::span<double>(qup.data() + static_cast<std::size_t>(i) * w, w));
    const double den = s.s_plus - s.s_minus;
    wp[i] = den > 0.0 ? s.s_plus / den : 0.0;
    wm[i] = den > 0.0 ? s.s_minus / den : 0.0;
  }

  out.assign(sol.values.size(), 0.0);
  std::vector<double> qc(w), src(w);
  for (int j = 0; j < n; ++j) {
    path_integral_cell(r.S(j + 2), r.N(j + 2), qc);
    const double y = grid_.center(j);
    model_.source(sol.cell(j), model_.params().coriolis(y), model_.params().bathymetry_slope(y), src);
    const double* fl = &flux[static_cast<std::size_t>(j) * w];
    const double* fr = &flux[static_cast<std::size_t>(j + 1) * w];
    const double* ql = &qup[static_cast<std::size_t>(j) * w];
    const double* qr = &qup[static_cast<std::size_t>(j + 1) * w];
    double* o = &out[static_cast<std::size_t>(j) * w];
    for (int k = 0; k < w; ++k) {
      o[k] = -(fr[k] - fl[k] - qc[k] - wp[j] * ql[k] + wm[j + 1] * qr[k]) / dy + src[k];
    }
  }
  return max_speed;
}

double Fv1dSolver::cfl_from_speed(double max_speed) const {
  if (!(max_speed > 0.0)) return opt_.dt_max;
  return std::min(opt_.cfl * grid_.dy() / max_speed, opt_.dt_max);
}

double Fv1dSolver::cfl_dt(const Solution1D& sol) {
  std::vector<double> tmp;
  return cfl_from_speed(rhs(sol, tmp));
}

void Fv1dSolver::check_solution(const Solution1D& sol, const char* stage) const {
  const int n = grid_.n_cells;
  for (int j = 0; j < n; ++j) {
    const auto c = sol.cell(j);
    if (!(c[0] > model_.params().h_min)) {
      throw SolverError(std::string("fv1d: depth below floor after ") + stage + " in cell " +
                        std::to_string(j) + " (y = " + format_double(grid_.center(j)) + ")");
    }
    for (double x : c) {
      if (!std::isfinite(x)) {
        throw SolverError(std::string("fv1d: non-finite value after ") + stage + " in cell " +
                          std::to_string(j));
      }
    }
  }
}

void Fv1dSolver::finish_step(Solution1D& sol, const std::vector<double>& l0, double dt) {
  const std::size_t sz = sol.values.size();
  const std::vector<double> u0 = sol.values;
  Solution1D stage = sol;
  for (std::size_t k = 0; k < sz; ++k) stage.values[k] = u0[k] + dt * l0[k];
  check_solution(stage, "stage 1");

  std::vector<double> l;
  rhs(stage, l);
  for (std::size_t k = 0; k < sz; ++k) {
    stage.values[k] = 0.75 * u0[k] + 0.25 * (stage.values[k] + dt * l[k]);
  }
  check_solution(stage, "stage 2");

  rhs(stage, l);
  for (std::size_t k = 0; k < sz; ++k) {
    sol.values[k] = u0[k] / 3.0 + 2.0 / 3.0 * (stage.values[k] + dt * l[k]);
  }
  check_solution(sol, "stage 3");
  sol.time += dt;
  ++stats_.steps;
  stats_.last_dt = dt;
}

void Fv1dSolver::step(Solution1D& sol, double dt) {
  std::vector<double> l0;
  rhs(sol, l0);
  finish_step(sol, l0, dt);
}

void Fv1dSolver::advance(Solution1D& sol, double t_final) {
  check_solution(sol, "initialization");
  std::vector<double> l0;
  while (sol.time < t_final) {
    const double speed = rhs(sol, l0);
    double dt = cfl_from_speed(speed);
    const double remaining = t_final - sol.time;
    bool last = false;
    if (dt >= remaining) {
      dt = remaining;
      last = true;
    }
    finish_step(sol, l0, dt);
    if (last) sol.time = t_final;
    spdlog::trace("fv1d: t = {} dt = {} max im ratio = {}", sol.time, dt, stats_.max_im_ratio);
  }
}

void Fv1dSolver::advance_fixed(Solution1D& sol, double dt, int n_steps) {
  for (int s = 0; s < n_steps; ++s) step(sol, dt);
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string snapshot_header(int order) {
  std::string h = "y,h,hu_m,hv_m,ha_m,hb_m";
  for (int l = 1; l <= order; ++l) {
    const std::string s = std::to_string(l);
    h += ",h_alpha_" + s + ",h_beta_" + s + ",h_gamma_" + s + ",h_eta_" + s;
  }
  return h;
}

void write_snapshot_csv(std::ostream& os, const Solution1D& sol) {
  os << snapshot_header((sol.width - 5) / 4) << '\n';
  for (int j = 0; j < sol.grid.n_cells; ++j) {
    os << format_double(sol.grid.center(j));
    for (double x : sol.cell(j)) os << ',' << format_double(x);
    os << '\n';
  }
}

}  // namespace mrswme
