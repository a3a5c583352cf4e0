/// @file closure.hpp
/// @brief Shifted Legendre basis on [0,1] and the closure tensors that couple
/// vertical moments in the magnetic shallow water moment hierarchy.
///
/// The basis is phi_l(zeta) = (-1)^l P_l(2 zeta - 1), so phi_l(0) = 1 and
/// int_0^1 phi_i phi_j = delta_ij / (2i + 1). A vertical profile is written as
///
///   w(zeta) = w_m + sum_{l=1..M} psi_l phi_l(zeta).
///
/// Closure tensors (all indices 1-based, 1 <= i,l,n <= M):
///   A_iln   = (2i+1) int phi_i phi_l phi_n
///   B_iln   = (2i+1) int phi_i' (int_0^zeta phi_l) phi_n
///   Gamma_il = (2i+1) int zeta phi_i phi_l'
#pragma once

#include <functional>
#include <span>
#include <vector>

namespace mrswme {

/// Largest moment order supported by the basis and the tensor builder.
inline constexpr int kMaxOrder = 12;

/// Gauss-Legendre nodes and weights mapped to [0,1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [0,1] (exact for polynomials of degree 2n-1).
QuadratureRule gauss_legendre_unit(int n);

/// Shifted Legendre basis phi_1..phi_M normalized by phi_l(0) = 1.
class BasisSet {
 public:
  explicit BasisSet(int order);

  int order() const { return order_; }

  /// phi_l(zeta). Throws std::out_of_range for l outside 1..M and
  /// std::domain_error for zeta outside [0,1].
  double eval(int l, double zeta) const;
  /// d phi_l / d zeta.
  double derivative(int l, double zeta) const;
  /// int_0^zeta phi_l.
  double antiderivative(int l, double zeta) const;

  /// Monomial coefficients c_0..c_l with phi_l(zeta) = sum_k c_k zeta^k.
  std::span<const double> monomial_coefficients(int l) const;

 private:
  void check_index(int l) const;

  int order_;
  std::vector<std::vector<double>> monomials_;
};

/// Legendre-recurrence evaluation of phi_0..phi_{values.size()-1} at zeta.
/// No range checks; used by the hot loops that already validated input.
void shifted_legendre_values(double zeta, std::span<double> values);

/// Closure tensors for a fixed order M, immutable after construction.
class ClosureTensors {
 public:
  ClosureTensors() = default;

  int order() const { return order_; }

  double A(int i, int l, int n) const { return a_[index3(i, l, n)]; }
  double B(int i, int l, int n) const { return b_[index3(i, l, n)]; }
  double Gamma(int i, int l) const { return gamma_[(i - 1) * order_ + (l - 1)]; }
  double phi_at_one(int l) const { return phi_one_[l - 1]; }

  std::span<const double> A_data() const { return a_; }
  std::span<const double> B_data() const { return b_; }
  std::span<const double> Gamma_data() const { return gamma_; }
  std::span<const double> phi_at_one_data() const { return phi_one_; }

 private:
  friend ClosureTensors build_tensors(int order);

  std::size_t index3(int i, int l, int n) const {
    return (static_cast<std::size_t>(i - 1) * order_ + (l - 1)) * order_ + (n - 1);
  }

  int order_ = 0;
  std::vector<double> a_;
  std::vector<double> b_;
  std::vector<double> gamma_;
  std::vector<double> phi_one_;
};

/// Gauss nodes needed for exact tensor integrands at order M. build_tensors
/// uses the count for kMaxOrder at every order.
int tensor_quadrature_nodes(int order);

/// Builds A, B, Gamma and phi_l(1) for order M in [0, kMaxOrder].
/// Entries below 1e-12 in magnitude are exact zeros of the underlying
/// rational integrals and are stored as 0.
ClosureTensors build_tensors(int order);

struct ProjectedProfile {
  double mean = 0.0;
  std::vector<double> moments;
};

/// Projects a vertical profile onto the mean and the first M moments:
/// moments[i-1] = (2i+1) int_0^1 phi_i profile.
ProjectedProfile project_profile(const std::function<double(double)>& profile, int order);

/// mean + sum_l moments[l-1] phi_l(zeta).
double eval_profile(double mean, std::span<const double> moments, double zeta);

}  // namespace mrswme
