#include "mrswme/ref2d.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "mrswme/errors.hpp"
#include "mrswme/path_integral.hpp"

namespace mrswme {

namespace {

// rows hu, hv, ha, hb of Q(U) = -(a, b, u, v): chi index per row
constexpr int kChi[5] = {-1, 3, 4, 1, 2};

int wrap(int j, int n, Boundary b) {
  if (b == Boundary::periodic) return ((j % n) + n) % n;
  return std::clamp(j, 0, n - 1);
}

void add_noncons(const PathWeights& w, std::span<const double> lo, std::span<const double> hi,
                 double jump, double* out) {
  for (int row = 1; row < 5; ++row) out[row] -= jump * w.ratio(lo[kChi[row]], hi[kChi[row]]);
}

void cu_combine(const Vec5& fl, const Vec5& fr, std::span<const double> ul,
                std::span<const double> ur, double sm, double sp, double* out) {
  cu_flux(fl, fr, ul, ur, sm, sp, std::span<double>(out, 5));
}

double cu_scalar(double fl, double fr, double ul, double ur, double sm, double sp) {
  const double den = sp - sm;
  if (den == 0.0) return 0.0;
  return (sp * fl - sm * fr) / den + sp * sm / den * (ur - ul);
}

}  // namespace

void Grid2D::validate() const {
  if (n_y < 4) throw std::invalid_argument("reference grid needs n_y >= 4");
  if (n_zeta < 4) throw std::invalid_argument("reference grid needs n_zeta >= 4");
  if (!(y_max > y_min)) throw std::invalid_argument("reference grid needs y_max > y_min");
}

RefState2D::RefState2D(const Grid2D& g)
    : grid(g),
      u(static_cast<std::size_t>(g.n_y) * g.n_zeta * 5, 0.0),
      B(static_cast<std::size_t>(g.n_y) * g.n_zeta, 0.0) {}

Vec5 flux_y(std::span<const double> u, double g) {
  const double h = u[0], inv = 1.0 / h;
  return {u[2], u[1] * u[2] * inv - u[3] * u[4] * inv,
          u[2] * u[2] * inv + 0.5 * g * h * h - u[4] * u[4] * inv, u[3] * u[2] * inv - u[4] * u[1] * inv,
          0.0};
}

Vec5 flux_zeta(std::span<const double> u, double omega, double c) {
  return {u[0] * omega, u[1] * omega - u[3] * c, u[2] * omega - u[4] * c, u[3] * omega - u[1] * c,
          u[4] * omega - u[2] * c};
}

std::vector<double> coupling_omega(std::span<const double> d, std::span<const double> h_up,
                                   std::span<const double> h_down, double dzeta, double h_min) {
  const std::size_t n = d.size();
  double mean = 0.0;
  for (double x : d) mean += dzeta * x;
  std::vector<double> omega(n + 1, 0.0);
  double partial = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    partial += dzeta * (mean - d[k - 1]);
    const double hs = h_down[k] + h_up[k - 1];
    if (!(hs > 2.0 * h_min)) throw SolverError("ref2d: degenerate interface depth in omega");
    omega[k] = 2.0 * partial / hs;
  }
  return omega;
}

CouplingC coupling_C(std::span<const double> sigma_b, double dzeta) {
  const std::size_t n = sigma_b.size();
  CouplingC c;
  c.center.resize(n);
  c.up.resize(n);
  c.down.resize(n);
  double below = 0.0;  // sum over l < k
  for (std::size_t k = 0; k < n; ++k) {
    c.center[k] = -dzeta * (0.5 * sigma_b[k] + below);
    c.up[k] = c.center[k] - 0.5 * dzeta * sigma_b[k];
    c.down[k] = c.center[k] + 0.5 * dzeta * sigma_b[k];
    below += sigma_b[k];
  }
  return c;
}

double divergence_limiter(double minmod_slope, double b) {
  if (minmod_slope * b > 0.0) return std::min(1.0, minmod_slope / b);
  return 0.0;
}

RefSolver::RefSolver(RefOptions options, Grid2D grid) : opt_(std::move(options)), grid_(grid) {
  grid_.validate();
  if (!(opt_.g > 0.0)) throw std::invalid_argument("gravity must be positive");
  if (!(opt_.theta >= 1.0 && opt_.theta <= 2.0)) throw std::invalid_argument("theta outside [1, 2]");
  if (!(opt_.cfl > 0.0 && opt_.cfl <= 0.5)) throw std::invalid_argument("CFL number outside (0, 0.5]");
}

void RefSolver::init_divergence_field(RefState2D& s) const {
  const int ny = grid_.n_y, nz = grid_.n_zeta;
  const double th = opt_.theta, dy = grid_.dy();
  for (int j = 0; j < ny; ++j) {
    const int jm = wrap(j - 1, ny, grid_.boundary), jp = wrap(j + 1, ny, grid_.boundary);
    for (int k = 0; k < nz; ++k) {
      const double a = s.cell(jm, k)[4], b = s.cell(j, k)[4], c = s.cell(jp, k)[4];
      s.B[s.index(j, k)] = minmod3(th * (c - b), 0.5 * (c - a), th * (b - a)) / dy;
    }
  }
}

RefDiagnostics RefSolver::rhs(const RefState2D& s, std::vector<double>& du, std::vector<double>& db) {
  const int ny = grid_.n_y, nz = grid_.n_zeta;
  const int py = ny + 4, pz = nz + 2;
  const double dy = grid_.dy(), dz = grid_.dzeta(), th = opt_.theta, g = opt_.g;
  const double h_min = opt_.h_min;

  // padded copies: two ghost columns in y, one ghost cell in zeta
  std::vector<double> pu(static_cast<std::size_t>(py) * pz * 5), pb(static_cast<std::size_t>(py) * pz);
  auto pidx = [pz](int jp, int kp) { return static_cast<std::size_t>(jp) * pz + kp; };
  for (int jp = 0; jp < py; ++jp) {
    const int j = wrap(jp - 2, ny, grid_.boundary);
    for (int kp = 0; kp < pz; ++kp) {
      const int k = std::clamp(kp - 1, 0, nz - 1);
      std::copy_n(&s.u[5 * s.index(j, k)], 5, &pu[5 * pidx(jp, kp)]);
      pb[pidx(jp, kp)] = s.B[s.index(j, k)];
    }
  }
  auto P = [&](int jp, int kp) { return &pu[5 * pidx(jp, kp)]; };

  // reconstruction on padded columns 1..ny+2, real zeta cells
  const std::size_t nr = static_cast<std::size_t>(py) * nz;
  auto ridx = [nz](int jp, int k) { return static_cast<std::size_t>(jp) * nz + k; };
  std::vector<double> fn(nr * 5), fs(nr * 5), fu(nr * 5), fd(nr * 5);
  std::vector<double> sigb(nr, 0.0), vz(nr, 0.0);
  std::vector<double> hc(nr), hcu(nr), hcd(nr);
  long clipped = 0;
  for (int jp = 1; jp <= ny + 2; ++jp) {
    for (int k = 0; k < nz; ++k) {
      const int kp = k + 1;
      const double* c = P(jp, kp);
      const double* ym = P(jp - 1, kp);
      const double* yp = P(jp + 1, kp);
      const double* zm = P(jp, kp - 1);
      const double* zp = P(jp, kp + 1);
      double sy[5], sz[5];
      for (int q = 0; q < 5; ++q) {
        sy[q] = minmod3(th * (yp[q] - c[q]), 0.5 * (yp[q] - ym[q]), th * (c[q] - ym[q]));
        sz[q] = minmod3(th * (zp[q] - c[q]), 0.5 * (zp[q] - zm[q]), th * (c[q] - zm[q]));
      }
      const double bval = pb[pidx(jp, kp)];
      const double sb = divergence_limiter(sy[4] / dy, bval) * bval;
      sigb[ridx(jp, k)] = sb;
      sy[4] = sb * dy;
      if (c[0] - 0.5 * std::abs(sy[0]) <= h_min) sy[0] = 0.0, ++clipped;
      if (c[0] - 0.5 * std::abs(sz[0]) <= h_min) sz[0] = 0.0, ++clipped;
      const std::size_t r = ridx(jp, k);
      for (int q = 0; q < 5; ++q) {
        fn[5 * r + q] = c[q] + 0.5 * sy[q];
        fs[5 * r + q] = c[q] - 0.5 * sy[q];
        fu[5 * r + q] = c[q] + 0.5 * sz[q];
        fd[5 * r + q] = c[q] - 0.5 * sz[q];
      }
      const double vm = zm[2] / zm[0], v0 = c[2] / c[0], vp = zp[2] / zp[0];
      vz[r] = minmod3(th * (vp - v0), 0.5 * (vp - vm), th * (v0 - vm)) / dz;
    }
    const CouplingC cc = coupling_C(std::span<const double>(&sigb[ridx(jp, 0)], nz), dz);
    std::copy(cc.center.begin(), cc.center.end(), hc.begin() + ridx(jp, 0));
    std::copy(cc.up.begin(), cc.up.end(), hcu.begin() + ridx(jp, 0));
    std::copy(cc.down.begin(), cc.down.end(), hcd.begin() + ridx(jp, 0));
  }
  stats_.clipped_slopes += clipped;
  auto face = [](const std::vector<double>& f, std::size_t r) {
    return std::span<const double>(&f[5 * r], 5);
  };

  RefDiagnostics diag;

  // y-interfaces: i = 0..ny between padded columns i+1 and i+2
  const std::size_t niy = static_cast<std::size_t>(ny + 1) * nz;
  std::vector<double> gy(niy * 5), qy(niy * 5, 0.0), wpy(niy), wmy(niy), by(niy);
  for (int i = 0; i <= ny; ++i) {
    const int jl = i + 1, jr = i + 2;
    for (int k = 0; k < nz; ++k) {
      const std::size_t rl = ridx(jl, k), rr = ridx(jr, k), e = static_cast<std::size_t>(i) * nz + k;
      const auto ul = face(fn, rl), ur = face(fs, rr);
      if (!(ul[0] > h_min && ur[0] > h_min)) throw SolverError("ref2d: nonpositive face depth");
      const double vl = ul[2] / ul[0], vr = ur[2] / ur[0];
      const double bl = ul[4] / ul[0], br = ur[4] / ur[0];
      const double cl = std::sqrt(bl * bl + g * ul[0]), cr = std::sqrt(br * br + g * ur[0]);
      const double sp = std::max({vl + cl, vr + cr, 0.0});
      const double sm = std::min({vl - cl, vr - cr, 0.0});
      diag.max_speed_y = std::max({diag.max_speed_y, sp, -sm});
      cu_combine(flux_y(ul, g), flux_y(ur, g), ul, ur, sm, sp, &gy[5 * e]);
      const double jump = ur[4] - ul[4];
      if (jump != 0.0) add_noncons(path_weights(ul[0], ur[0]), ul, ur, jump, &qy[5 * e]);
      const double den = sp - sm;
      wpy[e] = den > 0.0 ? sp / den : 0.0;
      wmy[e] = den > 0.0 ? sm / den : 0.0;
      const double Bl = pb[pidx(jl, k + 1)], Br = pb[pidx(jr, k + 1)];
      by[e] = cu_scalar(vl * Bl - hc[rl] * vz[rl], vr * Br - hc[rr] * vz[rr], Bl, Br, sm, sp);
    }
  }

  // velocity coupling on real columns
  diag.omega.assign(static_cast<std::size_t>(ny) * (nz + 1), 0.0);
  {
    std::vector<double> d(nz), hup(nz), hdn(nz);
    for (int j = 0; j < ny; ++j) {
      for (int k = 0; k < nz; ++k) {
        const std::size_t el = static_cast<std::size_t>(j) * nz + k, er = el + nz;
        d[k] = (gy[5 * er] - gy[5 * el]) / dy;
        const std::size_t r = ridx(j + 2, k);
        hup[k] = fu[5 * r];
        hdn[k] = fd[5 * r];
      }
      const auto w = coupling_omega(d, hup, hdn, dz, h_min);
      std::copy(w.begin(), w.end(), diag.omega.begin() + static_cast<std::size_t>(j) * (nz + 1));
    }
  }
  auto omega_at = [&](int j, int ki) { return diag.omega[static_cast<std::size_t>(j) * (nz + 1) + ki]; };

  // omega_y at real cells from cell-centred omega
  std::vector<double> wy(static_cast<std::size_t>(ny) * nz);
  for (int j = 0; j < ny; ++j) {
    const int jm = wrap(j - 1, ny, grid_.boundary), jp = wrap(j + 1, ny, grid_.boundary);
    for (int k = 0; k < nz; ++k) {
      const double a = 0.5 * (omega_at(jm, k) + omega_at(jm, k + 1));
      const double b = 0.5 * (omega_at(j, k) + omega_at(j, k + 1));
      const double c = 0.5 * (omega_at(jp, k) + omega_at(jp, k + 1));
      wy[static_cast<std::size_t>(j) * nz + k] = minmod3(th * (c - b), 0.5 * (c - a), th * (b - a)) / dy;
    }
  }

  // zeta-interfaces: ki = 0..nz, only 1..nz-1 carry flux
  const std::size_t niz = static_cast<std::size_t>(ny) * (nz + 1);
  std::vector<double> hz(niz * 5, 0.0), qz(niz * 5, 0.0), wpz(niz, 0.0), wmz(niz, 0.0), bz(niz, 0.0);
  for (int j = 0; j < ny; ++j) {
    for (int ki = 1; ki < nz; ++ki) {
      const std::size_t rl = ridx(j + 2, ki - 1), rr = ridx(j + 2, ki);
      const std::size_t e = static_cast<std::size_t>(j) * (nz + 1) + ki;
      const auto ul = face(fu, rl), ur = face(fd, rr);
      if (!(ul[0] > h_min && ur[0] > h_min)) throw SolverError("ref2d: nonpositive face depth");
      const double w = omega_at(j, ki);
      const double cl = hcu[rl] / ul[0], cr = hcd[rr] / ur[0];
      const double sp = std::max({w + std::abs(cl), w + std::abs(cr), 0.0});
      const double sm = std::min({w - std::abs(cl), w - std::abs(cr), 0.0});
      diag.max_speed_zeta = std::max({diag.max_speed_zeta, sp, -sm});
      cu_combine(flux_zeta(ul, w, cl), flux_zeta(ur, w, cr), ul, ur, sm, sp, &hz[5 * e]);
      const double jump = hcd[rr] - hcu[rl];
      if (jump != 0.0) add_noncons(path_weights(ul[0], ur[0]), ul, ur, jump, &qz[5 * e]);
      const double den = sp - sm;
      wpz[e] = den > 0.0 ? sp / den : 0.0;
      wmz[e] = den > 0.0 ? sm / den : 0.0;
      const std::size_t cl_idx = static_cast<std::size_t>(j) * nz + ki - 1, cr_idx = cl_idx + 1;
      const double Bl = s.B[cl_idx], Br = s.B[cr_idx];
      bz[e] = cu_scalar(w * Bl + fu[5 * rl + 4] * wy[cl_idx], w * Br + fd[5 * rr + 4] * wy[cr_idx], Bl, Br,
                        sm, sp);
    }
  }

  // assemble
  du.assign(s.u.size(), 0.0);
  db.assign(s.B.size(), 0.0);
  diag.hc_center.resize(s.B.size());
  diag.hc_up.resize(s.B.size());
  diag.hc_down.resize(s.B.size());
  diag.sigma_b.resize(s.B.size());
  diag.hb_face_n.resize(s.B.size());
  diag.hb_face_s.resize(s.B.size());
  for (int j = 0; j < ny; ++j) {
    const double y = grid_.y_center(j);
    const double f = opt_.coriolis(y), zy = opt_.bathymetry_slope(y);
    for (int k = 0; k < nz; ++k) {
      const std::size_t c = s.index(j, k), r = ridx(j + 2, k);
      const std::size_t el = static_cast<std::size_t>(j) * nz + k, er = el + nz;
      const std::size_t zl = static_cast<std::size_t>(j) * (nz + 1) + k, zr = zl + 1;
      const auto uc = s.cell(j, k);
      double qcy[5] = {0, 0, 0, 0, 0}, qcz[5] = {0, 0, 0, 0, 0};
      const auto us = face(fs, r), un = face(fn, r), ud = face(fd, r), uu = face(fu, r);
      if (sigb[r] != 0.0) {
        add_noncons(path_weights(us[0], un[0]), us, un, sigb[r] * dy, qcy);
        add_noncons(path_weights(ud[0], uu[0]), ud, uu, hcu[r] - hcd[r], qcz);
      }
      const double src[5] = {0.0, f * uc[2], -f * uc[1] - g * uc[0] * zy, 0.0, 0.0};
      for (int q = 0; q < 5; ++q) {
        const double ty = gy[5 * er + q] - gy[5 * el + q] - qcy[q] - wpy[el] * qy[5 * el + q] +
                          wmy[er] * qy[5 * er + q];
        const double tz = hz[5 * zr + q] - hz[5 * zl + q] - qcz[q] - wpz[zl] * qz[5 * zl + q] +
                          wmz[zr] * qz[5 * zr + q];
        du[5 * c + q] = -ty / dy - tz / dz + src[q];
      }
      db[c] = -(by[er] - by[el]) / dy - (bz[zr] - bz[zl]) / dz;

      diag.hc_center[c] = hc[r];
      diag.hc_up[c] = hcu[r];
      diag.hc_down[c] = hcd[r];
      diag.sigma_b[c] = sigb[r];
      diag.hb_face_n[c] = un[4];
      diag.hb_face_s[c] = us[4];
      diag.div_residual = std::max(diag.div_residual, std::abs(sigb[r] + (hcu[r] - hcd[r]) / dz));
      diag.max_abs_b = std::max(diag.max_abs_b, std::abs(s.B[c]));
    }
  }
  stats_.max_div_residual = std::max(stats_.max_div_residual, diag.div_residual);
  if (diag.max_abs_b > 0.0) {
    stats_.max_div_ratio = std::max(stats_.max_div_ratio, diag.div_residual / diag.max_abs_b);
  } else if (diag.div_residual > 0.0) {
    stats_.max_div_ratio = std::numeric_limits<double>::infinity();
  }
  return diag;
}

double RefSolver::dt_from(const RefDiagnostics& d) const {
  double dt = opt_.dt_max;
  if (d.max_speed_y > 0.0) dt = std::min(dt, opt_.cfl * grid_.dy() / d.max_speed_y);
  if (d.max_speed_zeta > 0.0) dt = std::min(dt, opt_.cfl * grid_.dzeta() / d.max_speed_zeta);
  return dt;
}

double RefSolver::cfl_dt(const RefState2D& s) {
  std::vector<double> du, db;
  return dt_from(rhs(s, du, db));
}

void RefSolver::check_state(const RefState2D& s, const char* stage) const {
  for (int j = 0; j < grid_.n_y; ++j) {
    for (int k = 0; k < grid_.n_zeta; ++k) {
      const auto c = s.cell(j, k);
      if (!(c[0] > opt_.h_min)) {
        throw SolverError(std::string("ref2d: depth below floor after ") + stage + " in cell (" +
                          std::to_string(j) + ", " + std::to_string(k) + ")");
      }
      for (double x : c) {
        if (!std::isfinite(x)) throw SolverError(std::string("ref2d: non-finite value after ") + stage);
      }
      if (!std::isfinite(s.B[s.index(j, k)])) {
        throw SolverError(std::string("ref2d: non-finite divergence field after ") + stage);
      }
    }
  }
}

void RefSolver::finish_step(RefState2D& s, const std::vector<double>& du0,
                            const std::vector<double>& db0, double dt) {
  const std::vector<double> u0 = s.u, b0 = s.B;
  RefState2D st = s;
  for (std::size_t i = 0; i < u0.size(); ++i) st.u[i] = u0[i] + dt * du0[i];
  for (std::size_t i = 0; i < b0.size(); ++i) st.B[i] = b0[i] + dt * db0[i];
  check_state(st, "stage 1");

  std::vector<double> du, db;
  rhs(st, du, db);
  for (std::size_t i = 0; i < u0.size(); ++i) st.u[i] = 0.75 * u0[i] + 0.25 * (st.u[i] + dt * du[i]);
  for (std::size_t i = 0; i < b0.size(); ++i) st.B[i] = 0.75 * b0[i] + 0.25 * (st.B[i] + dt * db[i]);
  check_state(st, "stage 2");

  rhs(st, du, db);
  for (std::size_t i = 0; i < u0.size(); ++i) s.u[i] = u0[i] / 3.0 + 2.0 / 3.0 * (st.u[i] + dt * du[i]);
  for (std::size_t i = 0; i < b0.size(); ++i) s.B[i] = b0[i] / 3.0 + 2.0 / 3.0 * (st.B[i] + dt * db[i]);
  check_state(s, "stage 3");
  s.time += dt;
  ++stats_.steps;
  stats_.last_dt = dt;
}

void RefSolver::step(RefState2D& s, double dt) {
  std::vector<double> du, db;
  rhs(s, du, db);
  finish_step(s, du, db, dt);
}

void RefSolver::advance(RefState2D& s, double t_final) {
  check_state(s, "initialization");
  std::vector<double> du, db;
  while (s.time < t_final) {
    double dt = dt_from(rhs(s, du, db));
    const double remaining = t_final - s.time;
    bool last = false;
    if (dt >= remaining) {
      dt = remaining;
      last = true;
    }
    finish_step(s, du, db, dt);
    if (last) s.time = t_final;
    spdlog::trace("ref2d: t = {} dt = {}", s.time, dt);
  }
}

void RefSolver::advance_fixed(RefState2D& s, double dt, int n_steps) {
  for (int i = 0; i < n_steps; ++i) step(s, dt);
}

DepthAverage depth_average(const RefState2D& s) {
  const int ny = s.grid.n_y, nz = s.grid.n_zeta;
  const double dz = s.grid.dzeta();
  DepthAverage d;
  for (auto* v : {&d.y, &d.h, &d.u_m, &d.v_m, &d.a_m, &d.b_m}) v->resize(ny);
  for (int j = 0; j < ny; ++j) {
    double sum[5] = {0, 0, 0, 0, 0};
    for (int k = 0; k < nz; ++k) {
      const auto c = s.cell(j, k);
      for (int q = 0; q < 5; ++q) sum[q] += c[q] * dz;
    }
    d.y[j] = s.grid.y_center(j);
    d.h[j] = sum[0];
    d.u_m[j] = sum[1] / sum[0];
    d.v_m[j] = sum[2] / sum[0];
    d.a_m[j] = sum[3] / sum[0];
    d.b_m[j] = sum[4] / sum[0];
  }
  return d;
}

int slice_column(const Grid2D& g, double y0) {
  double x = (y0 - g.y_min) / g.dy();
  const double nearest = std::round(x);
  if (std::abs(x - nearest) < 1e-9) x = nearest;
  const int j = static_cast<int>(std::ceil(x)) - 1;
  return std::clamp(j, 0, g.n_y - 1);
}

ProfileSlice profile_slice(const RefState2D& s, double y0) {
  ProfileSlice p;
  p.j = slice_column(s.grid, y0);
  p.y = s.grid.y_center(p.j);
  for (int k = 0; k < s.grid.n_zeta; ++k) {
    const auto c = s.cell(p.j, k);
    p.zeta.push_back(s.grid.zeta_center(k));
    p.h.push_back(c[0]);
    p.u.push_back(c[1] / c[0]);
    p.v.push_back(c[2] / c[0]);
    p.a.push_back(c[3] / c[0]);
    p.b.push_back(c[4] / c[0]);
  }
  return p;
}

void write_reference_csv(std::ostream& os, const RefState2D& s) {
  os << "y,zeta,h,u,v,a,b\n";
  for (int j = 0; j < s.grid.n_y; ++j) {
    for (int k = 0; k < s.grid.n_zeta; ++k) {
      const auto c = s.cell(j, k);
      os << format_double(s.grid.y_center(j)) << ',' << format_double(s.grid.zeta_center(k)) << ','
         << format_double(c[0]);
      for (int q = 1; q < 5; ++q) os << ',' << format_double(c[q] / c[0]);
      os << '\n';
    }
  }
}

void write_depth_average_csv(std::ostream& os, const DepthAverage& d) {
  os << "y,h,u_m,v_m,a_m,b_m\n";
  for (std::size_t j = 0; j < d.y.size(); ++j) {
    os << format_double(d.y[j]) << ',' << format_double(d.h[j]) << ',' << format_double(d.u_m[j]) << ','
       << format_double(d.v_m[j]) << ',' << format_double(d.a_m[j]) << ',' << format_double(d.b_m[j])
       << '\n';
  }
}

}  // namespace mrswme
