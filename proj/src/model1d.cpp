#include "mrswme/model1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mrswme/errors.hpp"

namespace mrswme {

namespace {

using L = StateLayout;

}  // namespace

MomentModel::MomentModel(ModelParams params)
    : params_(std::move(params)), tensors_(build_tensors(params_.order)) {
  if (!(params_.g > 0.0)) throw ConfigError("gravity must be positive");
  build_flux_terms();
  build_noncons_terms();
}

void MomentModel::build_flux_terms() {
  const int m = params_.order;
  auto add = [&](int row, int p, int q, double c) {
    if (c != 0.0) flux_terms_.push_back({row, p, q, c});
  };
  add(L::kHu, L::kHu, L::kHv, 1.0);
  add(L::kHu, L::kHa, L::kHb, -1.0);
  add(L::kHv, L::kHv, L::kHv, 1.0);
  add(L::kHv, L::kHb, L::kHb, -1.0);
  add(L::kHa, L::kHa, L::kHv, 1.0);
  add(L::kHa, L::kHb, L::kHu, -1.0);
  for (int l = 1; l <= m; ++l) {
    const double w = 1.0 / (2.0 * l + 1.0);
    add(L::kHu, L::alpha(l), L::beta(l), w);
    add(L::kHu, L::gamma(l), L::eta(l), -w);
    add(L::kHv, L::beta(l), L::beta(l), w);
    add(L::kHv, L::eta(l), L::eta(l), -w);
    add(L::kHa, L::beta(l), L::gamma(l), w);
    add(L::kHa, L::alpha(l), L::eta(l), -w);
  }
  for (int i = 1; i <= m; ++i) {
    add(L::alpha(i), L::kHu, L::beta(i), 1.0);
    add(L::alpha(i), L::kHv, L::alpha(i), 1.0);
    add(L::alpha(i), L::kHa, L::eta(i), -1.0);
    add(L::alpha(i), L::kHb, L::gamma(i), -1.0);
    add(L::beta(i), L::kHv, L::beta(i), 2.0);
    add(L::beta(i), L::kHb, L::eta(i), -2.0);
    add(L::gamma(i), L::kHa, L::beta(i), 1.0);
    add(L::gamma(i), L::kHv, L::gamma(i), 1.0);
    add(L::gamma(i), L::kHb, L::alpha(i), -1.0);
    add(L::gamma(i), L::kHu, L::eta(i), -1.0);
    for (int l = 1; l <= m; ++l) {
      for (int n = 1; n <= m; ++n) {
        const double a = tensors_.A(i, l, n);
        add(L::alpha(i), L::alpha(l), L::beta(n), a);
        add(L::alpha(i), L::gamma(l), L::eta(n), -a);
        add(L::beta(i), L::beta(l), L::beta(n), a);
        add(L::beta(i), L::eta(l), L::eta(n), -a);
        add(L::gamma(i), L::beta(l), L::gamma(n), a);
        add(L::gamma(i), L::alpha(l), L::eta(n), -a);
      }
    }
  }
}

void MomentModel::build_noncons_terms() {
  const int m = params_.order;
  auto add = [&](int row, int col, int chi, double c) {
    if (c != 0.0) q_terms_.push_back({row, col, chi, c});
  };
  // mean rows, hb_m column
  add(L::kHu, L::kHb, L::kHa, -1.0);
  add(L::kHv, L::kHb, L::kHb, -1.0);
  add(L::kHa, L::kHb, L::kHu, -1.0);
  add(L::kHb, L::kHb, L::kHv, -1.0);
  for (int l = 1; l <= m; ++l) {
    const double p = tensors_.phi_at_one(l);
    add(L::kHu, L::kHb, L::gamma(l), -p);
    add(L::kHv, L::kHb, L::eta(l), -p);
    add(L::kHa, L::kHb, L::alpha(l), -p);
    add(L::kHb, L::kHb, L::beta(l), -p);
  }
  // moment rows; the vertical coupling term B_iln chi_n (h beta_l)_y lands in
  // column h beta_l, so column k carries sum_n B_ikn chi_n
  for (int i = 1; i <= m; ++i) {
    for (int l = 1; l <= m; ++l) {
      const double w = -(1.0 + tensors_.Gamma(i, l));
      add(L::alpha(i), L::kHb, L::gamma(l), w);
      add(L::beta(i), L::kHb, L::eta(l), w);
      add(L::gamma(i), L::kHb, L::alpha(l), w);
      add(L::eta(i), L::kHb, L::beta(l), w);
    }
    add(L::alpha(i), L::beta(i), L::kHu, 1.0);
    add(L::alpha(i), L::eta(i), L::kHa, -1.0);
    add(L::beta(i), L::beta(i), L::kHv, 1.0);
    add(L::beta(i), L::eta(i), L::kHb, -1.0);
    add(L::gamma(i), L::beta(i), L::kHa, 1.0);
    add(L::gamma(i), L::eta(i), L::kHu, -1.0);
    add(L::eta(i), L::beta(i), L::kHb, 1.0);
    add(L::eta(i), L::eta(i), L::kHv, -1.0);
    for (int k = 1; k <= m; ++k) {
      for (int n = 1; n <= m; ++n) {
        const double b = tensors_.B(i, k, n);
        add(L::alpha(i), L::beta(k), L::alpha(n), -b);
        add(L::alpha(i), L::eta(k), L::gamma(n), b);
        add(L::beta(i), L::beta(k), L::beta(n), -b);
        add(L::beta(i), L::eta(k), L::eta(n), b);
        add(L::gamma(i), L::beta(k), L::gamma(n), -b);
        add(L::gamma(i), L::eta(k), L::alpha(n), b);
        add(L::eta(i), L::beta(k), L::eta(n), -b);
        add(L::eta(i), L::eta(k), L::beta(n), b);
      }
    }
  }
}

void MomentModel::check_state(std::span<const double> u) const {
  if (static_cast<int>(u.size()) != size()) {
    throw SolverError("state has " + std::to_string(u.size()) + " entries, expected " +
                      std::to_string(size()));
  }
  if (!(u[L::kH] > params_.h_min)) {
    throw SolverError("depth " + std::to_string(u[L::kH]) + " at or below h_min");
  }
  for (double x : u) {
    if (!std::isfinite(x)) throw SolverError("non-finite state entry");
  }
}

void MomentModel::flux(std::span<const double> u, std::span<double> out) const {
  check_state(u);
  const double h = u[L::kH];
  const double inv_h = 1.0 / h;
  std::fill(out.begin(), out.end(), 0.0);
  out[L::kH] = u[L::kHv];
  out[L::kHv] = 0.5 * params_.g * h * h;
  for (const auto& t : flux_terms_) out[t.row] += t.coeff * u[t.p] * u[t.q] * inv_h;
}

std::vector<double> MomentModel::flux(std::span<const double> u) const {
  std::vector<double> out(size());
  flux(u, out);
  return out;
}

void MomentModel::source(std::span<const double> u, double f, double bathymetry_slope,
                         std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  out[L::kHu] = f * u[L::kHv];
  out[L::kHv] = -f * u[L::kHu] - params_.g * u[L::kH] * bathymetry_slope;
  for (int i = 1; i <= params_.order; ++i) {
    out[L::alpha(i)] = f * u[L::beta(i)];
    out[L::beta(i)] = -f * u[L::alpha(i)];
  }
}

std::vector<double> MomentModel::source(std::span<const double> u, double f,
                                        double bathymetry_slope) const {
  std::vector<double> out(size());
  source(u, f, bathymetry_slope, out);
  return out;
}

Eigen::MatrixXd MomentModel::noncons_matrix(std::span<const double> u) const {
  check_state(u);
  const double inv_h = 1.0 / u[L::kH];
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(size(), size());
  for (const auto& t : q_terms_) q(t.row, t.col) += t.coeff * u[t.chi] * inv_h;
  return q;
}

Eigen::MatrixXd MomentModel::flux_jacobian(std::span<const double> u) const {
  check_state(u);
  const int n = size();
  const double h = u[L::kH];
  const double inv_h = 1.0 / h;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  jac(L::kH, L::kHv) = 1.0;
  jac(L::kHv, L::kH) = params_.g * h;
  for (const auto& t : flux_terms_) {
    jac(t.row, t.p) += t.coeff * u[t.q] * inv_h;
    jac(t.row, t.q) += t.coeff * u[t.p] * inv_h;
    jac(t.row, L::kH) -= t.coeff * u[t.p] * u[t.q] * inv_h * inv_h;
  }
  return jac;
}

Eigen::MatrixXd MomentModel::flux_jacobian_fd(std::span<const double> u, double eps) const {
  check_state(u);
  const int n = size();
  Eigen::MatrixXd jac(n, n);
  std::vector<double> up(u.begin(), u.end()), um(u.begin(), u.end());
  std::vector<double> gp(n), gm(n);
  for (int k = 0; k < n; ++k) {
    const double step = eps * std::max(1.0, std::abs(u[k]));
    up[k] = u[k] + step;
    um[k] = u[k] - step;
    flux(up, gp);
    flux(um, gm);
    for (int r = 0; r < n; ++r) jac(r, k) = (gp[r] - gm[r]) / (2.0 * step);
    up[k] = u[k];
    um[k] = u[k];
  }
  return jac;
}

Eigen::MatrixXd MomentModel::jacobian(std::span<const double> u) const {
  return flux_jacobian(u) - noncons_matrix(u);
}

Eigen::VectorXcd MomentModel::eigenvalues(std::span<const double> u) const {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(jacobian(u), false);
  if (solver.info() != Eigen::Success) throw SolverError("eigenvalue iteration did not converge");
  return solver.eigenvalues();
}

double imaginary_ratio(const Eigen::VectorXcd& lambda) {
  double re = 0.0, im = 0.0;
  for (const auto& z : lambda) {
    re = std::max(re, std::abs(z.real()));
    im = std::max(im, std::abs(z.imag()));
  }
  if (im == 0.0) return 0.0;
  if (re == 0.0) return std::numeric_limits<double>::infinity();
  return im / re;
}

LocalSpeeds MomentModel::local_speeds(std::span<const double> left,
                                      std::span<const double> right) const {
  LocalSpeeds s;
  for (auto state : {left, right}) {
    const Eigen::VectorXcd lambda = eigenvalues(state);
    const double ratio = imaginary_ratio(lambda);
    s.im_ratio = std::max(s.im_ratio, ratio);
    if (ratio > params_.tol_im) {
      throw HyperbolicityError("complex eigenvalues with max|Im|/max|Re| = " +
                                   std::to_string(ratio),
                               ratio);
    }
    for (const auto& z : lambda) {
      s.s_minus = std::min(s.s_minus, z.real());
      s.s_plus = std::max(s.s_plus, z.real());
    }
  }
  return s;
}

}  // namespace mrswme
