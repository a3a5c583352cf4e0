#include "mrswme/hyperbolicity.hpp"

#include <spdlog/spdlog.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mrswme/fv1d.hpp"

namespace mrswme {

namespace {

using cd = std::complex<double>;

cd horner(const std::array<double, 5>& c, cd x) {
  cd p = c[0];
  for (int i = 1; i < 5; ++i) p = p * x + c[i];
  return p;
}

cd horner_prime(const std::array<double, 5>& c, cd x) {
  cd p = 4.0 * c[0];
  for (int i = 1; i < 4; ++i) p = p * x + static_cast<double>(4 - i) * c[i];
  return p;
}

}  // namespace

Roots4 monic_quartic_roots(double c3, double c2, double c1, double c0) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 0) = -c3;
  m(0, 1) = -c2;
  m(0, 2) = -c1;
  m(0, 3) = -c0;
  m(1, 0) = m(2, 1) = m(3, 2) = 1.0;
  Eigen::EigenSolver<Eigen::Matrix4d> es(m, false);
  const std::array<double, 5> c = {1.0, c3, c2, c1, c0};
  Roots4 r;
  for (int i = 0; i < 4; ++i) {
    cd x = es.eigenvalues()[i];
    double res = std::abs(horner(c, x));
    for (int it = 0; it < 3 && res > 0.0; ++it) {
      const cd d = horner_prime(c, x);
      if (d == 0.0) break;
      cd y = x - horner(c, x) / d;
      // keep real roots on the real axis
      if (x.imag() == 0.0) y.imag(0.0);
      const double ry = std::abs(horner(c, y));
      if (!(ry < res)) break;
      x = y;
      res = ry;
    }
    r[i] = x;
  }
  return r;
}

std::array<double, 4> quartic_coefficients(double b, double bt, double et, double gh) {
  const double b2 = b * b;
  return {0.0, -3.0 * (3.0 * b2 / (b2 + gh) + 1.0 + 3.0 * bt * bt + et * et), -72.0 * b * bt * et,
          27.0 * b2 * (3.0 - bt * bt - 3.0 * et * et)};
}

Roots4 quartic_roots(double b_m, double beta_tilde, double eta_tilde, double gh) {
  if (!(gh > 0.0)) throw std::invalid_argument("quartic_roots needs gh > 0");
  const auto c = quartic_coefficients(b_m, beta_tilde, eta_tilde, gh);
  return monic_quartic_roots(c[0], c[1], c[2], c[3]);
}

bool roots_real(const Roots4& r, double tol) {
  return std::all_of(r.begin(), r.end(),
                     [tol](const cd& x) { return std::abs(x.imag()) <= tol * (1.0 + std::abs(x.real())); });
}

double roots_im_ratio(const Roots4& r) {
  double im = 0.0, re = 1.0;
  for (const auto& x : r) {
    im = std::max(im, std::abs(x.imag()));
    re = std::max(re, std::abs(x.real()));
  }
  return im / re;
}

HypVerdict is_hyperbolic(const MomentModel& model, std::span<const double> u, double tol_im) {
  const Eigen::VectorXcd ev = model.eigenvalues(u);
  double im = 0.0, re = std::sqrt(model.params().g * u[0]);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    im = std::max(im, std::abs(ev[i].imag()));
    re = std::max(re, std::abs(ev[i].real()));
  }
  HypVerdict v;
  v.max_im_ratio = im / re;
  v.hyperbolic = v.max_im_ratio <= tol_im;
  return v;
}

std::vector<double> first_order_state(double b_m, double beta_tilde, double eta_tilde, double gh,
                                      double g) {
  const double h = gh / g, scale = std::sqrt(b_m * b_m + gh);
  std::vector<double> u(9, 0.0);
  u[StateLayout::kH] = h;
  u[StateLayout::kHb] = h * b_m;
  u[StateLayout::beta(1)] = h * beta_tilde * scale;
  u[StateLayout::eta(1)] = h * eta_tilde * scale;
  return u;
}

ScanResult scan_region(const ScanAxis& b, const ScanAxis& beta, const ScanAxis& eta, double gh) {
  if (!(gh > 0.0)) throw std::invalid_argument("scan_region needs gh > 0");
  if (b.n < 1 || beta.n < 1 || eta.n < 1) throw std::invalid_argument("scan resolution must be >= 1");
  ScanResult r;
  r.b = b;
  r.beta = beta;
  r.eta = eta;
  r.gh = gh;
  r.samples.reserve(static_cast<std::size_t>(b.n) * beta.n * eta.n);
  for (int i = 0; i < b.n; ++i) {
    for (int j = 0; j < beta.n; ++j) {
      for (int k = 0; k < eta.n; ++k) {
        HypSample s;
        s.b_m = b.value(i);
        s.beta_tilde = beta.value(j);
        s.eta_tilde = eta.value(k);
        s.gh = gh;
        const Roots4 roots = quartic_roots(s.b_m, s.beta_tilde, s.eta_tilde, gh);
        s.hyperbolic = roots_real(roots);
        s.max_im_ratio = roots_im_ratio(roots);
        if (!s.hyperbolic) ++r.non_hyperbolic;
        r.samples.push_back(s);
      }
    }
  }
  return r;
}

void write_scan_csv(std::ostream& os, const ScanResult& r) {
  os << "b_m,beta_tilde,eta_tilde,hyperbolic,max_im_ratio\n";
  for (const auto& s : r.samples) {
    os << format_double(s.b_m) << ',' << format_double(s.beta_tilde) << ',' << format_double(s.eta_tilde)
       << ',' << (s.hyperbolic ? 1 : 0) << ',' << format_double(s.max_im_ratio) << '\n';
  }
}

AgreementReport quartic_jacobian_agreement(std::span<const HypSample> samples, double g, double tol_im) {
  ModelParams p;
  p.g = g;
  p.order = 1;
  const MomentModel model(p);
  AgreementReport rep;
  for (const auto& s : samples) {
    const auto u = first_order_state(s.b_m, s.beta_tilde, s.eta_tilde, s.gh, g);
    const HypVerdict v = is_hyperbolic(model, u, tol_im);
    ++rep.samples;
    if (v.hyperbolic == s.hyperbolic) {
      ++rep.agree;
    } else {
      const Roots4 q = quartic_roots(s.b_m, s.beta_tilde, s.eta_tilde, s.gh);
      std::string qs, js;
      for (const auto& x : q) qs += fmt::format(" {:.6g}{:+.6g}i", x.real(), x.imag());
      const Eigen::VectorXcd ev = model.eigenvalues(u);
      for (Eigen::Index i = 0; i < ev.size(); ++i) js += fmt::format(" {:.6g}{:+.6g}i", ev[i].real(), ev[i].imag());
      spdlog::debug("hyperbolicity disagreement at b_m={} beta~={} eta~={}: quartic{} | jacobian{}", s.b_m,
                   s.beta_tilde, s.eta_tilde, qs, js);
    }
  }
  return rep;
}

}  // namespace mrswme
