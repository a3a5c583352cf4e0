#pragma once

namespace mrswme {

/// Depth-dependent part of int_0^1 chi(s) / h(s) ds for chi and h linear in s.
/// With x = (h1 - h0) / (h1 + h0),
///
///   int_0^1 chi/h ds = (1/h_bar) [ chi_bar * F0(x) - (chi1 - chi0)/2 * F1(x) ],
///   F0 = atanh(x)/x,  F1 = (atanh(x)/x - 1)/x,
///
/// which is the logarithmic closed form rewritten so that it stays accurate
/// when h0 and h1 nearly coincide (F0 -> 1, F1 -> 0).
struct PathWeights {
  double f0 = 1.0;
  double f1 = 0.0;
  double inv_hbar = 1.0;

  double ratio(double chi0, double chi1) const {
    return (0.5 * (chi0 + chi1) * f0 - 0.5 * (chi1 - chi0) * f1) * inv_hbar;
  }
};

/// Throws SolverError unless both depths are positive.
PathWeights path_weights(double h0, double h1);

/// int_0^1 chi(s) / h(s) ds along the straight segment. Multiplied by the
/// jump of psi this is the cell or interface path integral of a
/// nonconservative product chi/h * psi_y.
double linear_ratio_mean(double h0, double h1, double chi0, double chi1);

}  // namespace mrswme
