/// @file hyperbolicity.hpp
/// @brief Hyperbolicity diagnostics: the first-order quartic, Jacobian
/// spectra and region scans.
///
/// The four non-closed-form speeds of the M = 1 system are the roots of
///
///   l^4 - 3(3b^2/(b^2+gh) + 1 + 3B^2 + E^2) l^2 - 72 b B E l + 27 b^2 (3 - B^2 - 3E^2)
///
/// with b = b_m, B = beta_1/sqrt(b^2+gh), E = eta_1/sqrt(b^2+gh).
#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include "mrswme/model1d.hpp"

namespace mrswme {

using Roots4 = std::array<std::complex<double>, 4>;

/// Roots of x^4 + c3 x^3 + c2 x^2 + c1 x + c0 from the companion matrix,
/// each polished by Newton steps that do not increase the residual.
Roots4 monic_quartic_roots(double c3, double c2, double c1, double c0);

/// Coefficients (c3, c2, c1, c0) of the first-order quartic.
std::array<double, 4> quartic_coefficients(double b_m, double beta_tilde, double eta_tilde, double gh);
Roots4 quartic_roots(double b_m, double beta_tilde, double eta_tilde, double gh);

/// |Im r| <= tol (1 + |Re r|) for every root.
bool roots_real(const Roots4& r, double tol = 1e-8);
/// max |Im| / max(max |Re|, 1).
double roots_im_ratio(const Roots4& r);

struct HypVerdict {
  bool hyperbolic = true;
  double max_im_ratio = 0.0;
};

/// Eigenvalues of J(U): hyperbolic iff max|Im| <= tol_im max(max|Re|, sqrt(g h)).
HypVerdict is_hyperbolic(const MomentModel& model, std::span<const double> u, double tol_im);

/// M = 1 state with v_m = u_m = a_m = 0, h = gh/g, beta_1 and eta_1 unscaled
/// from the tilde variables.
std::vector<double> first_order_state(double b_m, double beta_tilde, double eta_tilde, double gh,
                                      double g);

struct ScanAxis {
  double lo = 0.0;
  double hi = 0.0;
  int n = 1;
  double value(int i) const { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); }
};

struct HypSample {
  double b_m = 0.0;
  double beta_tilde = 0.0;
  double eta_tilde = 0.0;
  double gh = 1.0;
  bool hyperbolic = true;
  double max_im_ratio = 0.0;
};

/// Samples ordered with eta fastest, then beta, then b.
struct ScanResult {
  ScanAxis b, beta, eta;
  double gh = 1.0;
  std::vector<HypSample> samples;
  long non_hyperbolic = 0;
};

ScanResult scan_region(const ScanAxis& b, const ScanAxis& beta, const ScanAxis& eta, double gh);

/// CSV b_m,beta_tilde,eta_tilde,hyperbolic,max_im_ratio
void write_scan_csv(std::ostream& os, const ScanResult& r);

struct AgreementReport {
  long samples = 0;
  long agree = 0;
  double fraction() const { return samples ? static_cast<double>(agree) / samples : 1.0; }
};

/// Compares the quartic verdict of each sample with the verdict of the full
/// M = 1 Jacobian at first_order_state. Disagreements are logged.
AgreementReport quartic_jacobian_agreement(std::span<const HypSample> samples, double g, double tol_im);

}  // namespace mrswme
