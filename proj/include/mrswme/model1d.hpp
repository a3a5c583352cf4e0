/// @file model1d.hpp
/// @brief The 1-D (y-direction) magnetic rotating shallow water moment system
///
///   U_t + G(U)_y = Q(U) U_y + S(U)
///
/// for arbitrary moment order M. The conservative vector is
///
///   U = (h, hu_m, hv_m, ha_m, hb_m, h alpha_1, h beta_1, h gamma_1, h eta_1, ...,
///        h alpha_M, h beta_M, h gamma_M, h eta_M)
///
/// so it has 5 + 4M entries.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "mrswme/closure.hpp"

namespace mrswme {

/// Index map of the moment state vector.
struct StateLayout {
  static constexpr int kH = 0;
  static constexpr int kHu = 1;
  static constexpr int kHv = 2;
  static constexpr int kHa = 3;
  static constexpr int kHb = 4;

  int order = 0;

  int size() const { return 5 + 4 * order; }
  // moment blocks, 1-based l
  static constexpr int alpha(int l) { return 5 + 4 * (l - 1); }
  static constexpr int beta(int l) { return 6 + 4 * (l - 1); }
  static constexpr int gamma(int l) { return 7 + 4 * (l - 1); }
  static constexpr int eta(int l) { return 8 + 4 * (l - 1); }
};

using ScalarField = std::function<double(double)>;

struct ModelParams {
  double g = 1.0;
  ScalarField coriolis = [](double) { return 0.0; };
  ScalarField bathymetry = [](double) { return 0.0; };
  ScalarField bathymetry_slope = [](double) { return 0.0; };
  int order = 0;
  double h_min = 1e-10;
  /// Largest tolerated max|Im lambda| / max|Re lambda| before the run aborts.
  double tol_im = 0.1;
};

/// One-sided local speeds at an interface plus the imaginary-part ratio of
/// the spectra they were taken from.
struct LocalSpeeds {
  double s_minus = 0.0;
  double s_plus = 0.0;
  double im_ratio = 0.0;
};

/// Nonconservative term Q(U)_{row, col} += coeff * U[chi] / h.
struct NonconsTerm {
  int row;
  int col;
  int chi;
  double coeff;
};

/// The moment system for one order: fluxes, sources, nonconservative matrix
/// and wave-speed estimates. Immutable after construction.
class MomentModel {
 public:
  explicit MomentModel(ModelParams params);

  const ModelParams& params() const { return params_; }
  const ClosureTensors& tensors() const { return tensors_; }
  StateLayout layout() const { return StateLayout{params_.order}; }
  int size() const { return layout().size(); }

  /// Throws SolverError when h <= h_min or an entry is non-finite.
  void check_state(std::span<const double> u) const;

  void flux(std::span<const double> u, std::span<double> out) const;
  std::vector<double> flux(std::span<const double> u) const;

  void source(std::span<const double> u, double f, double bathymetry_slope,
              std::span<double> out) const;
  std::vector<double> source(std::span<const double> u, double f, double bathymetry_slope) const;

  /// Dense Q(U).
  Eigen::MatrixXd noncons_matrix(std::span<const double> u) const;
  /// Sparse term list behind Q(U); every nonzero entry is a sum of these.
  const std::vector<NonconsTerm>& noncons_terms() const { return q_terms_; }

  /// Exact dG/dU from the bilinear flux structure.
  Eigen::MatrixXd flux_jacobian(std::span<const double> u) const;
  /// Central finite-difference dG/dU with step eps * max(1, |U_k|).
  Eigen::MatrixXd flux_jacobian_fd(std::span<const double> u, double eps = 1e-7) const;

  /// J(U) = dG/dU - Q(U).
  Eigen::MatrixXd jacobian(std::span<const double> u) const;
  Eigen::VectorXcd eigenvalues(std::span<const double> u) const;

  /// s^- <= 0 <= s^+ from the spectra of J at both interface states.
  /// Complex eigenvalues are projected onto the real axis when the ratio is
  /// within tol_im; otherwise HyperbolicityError is thrown.
  LocalSpeeds local_speeds(std::span<const double> left, std::span<const double> right) const;

 private:
  // G[row] += coeff * U[p] * U[q] / h
  struct FluxTerm {
    int row;
    int p;
    int q;
    double coeff;
  };

  void build_flux_terms();
  void build_noncons_terms();

  ModelParams params_;
  ClosureTensors tensors_;
  std::vector<FluxTerm> flux_terms_;
  std::vector<NonconsTerm> q_terms_;
};

/// max |Im| / max |Re| over a spectrum (0 for an all-zero spectrum).
double imaginary_ratio(const Eigen::VectorXcd& lambda);

}  // namespace mrswme
