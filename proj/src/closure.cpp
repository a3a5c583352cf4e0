#include "mrswme/closure.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mrswme {

QuadratureRule gauss_legendre_unit(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_unit: need at least one node");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Newton on P_n(x) over [-1,1], roots paired by symmetry.
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // x_i is the i-th largest root; map to [0,1] ascending.
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

void shifted_legendre_values(double zeta, std::span<double> values) {
  if (values.empty()) return;
  values[0] = 1.0;
  if (values.size() == 1) return;
  const double s = 1.0 - 2.0 * zeta;
  values[1] = s;
  for (std::size_t n = 1; n + 1 < values.size(); ++n) {
    const double dn = static_cast<double>(n);
    values[n + 1] = ((2.0 * dn + 1.0) * s * values[n] - dn * values[n - 1]) / (dn + 1.0);
  }
}

BasisSet::BasisSet(int order) : order_(order) {
  if (order < 0 || order > kMaxOrder) {
    throw std::out_of_range("BasisSet: order " + std::to_string(order) + " outside [0, " +
                            std::to_string(kMaxOrder) + "]");
  }
  // Same recurrence as shifted_legendre_values, on coefficient vectors:
  // (n+1) phi_{n+1} = (2n+1)(1 - 2 zeta) phi_n - n phi_{n-1}
  monomials_.resize(order + 2);
  monomials_[0] = {1.0};
  monomials_[1] = {1.0, -2.0};
  for (int n = 1; n + 1 < static_cast<int>(monomials_.size()); ++n) {
    std::vector<double> next(n + 2, 0.0);
    for (int k = 0; k <= n; ++k) {
      next[k] += (2.0 * n + 1.0) * monomials_[n][k];
      next[k + 1] -= 2.0 * (2.0 * n + 1.0) * monomials_[n][k];
    }
    for (int k = 0; k < n; ++k) next[k] -= n * monomials_[n - 1][k];
    for (auto& c : next) c /= (n + 1.0);
    monomials_[n + 1] = std::move(next);
  }
  monomials_.resize(order + 1);
}

void BasisSet::check_index(int l) const {
  if (l < 1 || l > order_) {
    throw std::out_of_range("basis index " + std::to_string(l) + " outside [1, " +
                            std::to_string(order_) + "]");
  }
}

namespace {

void check_zeta(double zeta) {
  if (!(zeta >= 0.0 && zeta <= 1.0)) {
    throw std::domain_error("zeta = " + std::to_string(zeta) + " outside [0, 1]");
  }
}

}  // namespace

double BasisSet::eval(int l, double zeta) const {
  check_index(l);
  check_zeta(zeta);
  std::vector<double> phi(l + 1);
  shifted_legendre_values(zeta, phi);
  return phi[l];
}

double BasisSet::derivative(int l, double zeta) const {
  check_index(l);
  check_zeta(zeta);
  // phi_l' = -2 sum_{k = l-1, l-3, ...} (2k+1) phi_k
  std::vector<double> phi(l + 1);
  shifted_legendre_values(zeta, phi);
  double d = 0.0;
  for (int k = l - 1; k >= 0; k -= 2) d += (2.0 * k + 1.0) * phi[k];
  return -2.0 * d;
}

double BasisSet::antiderivative(int l, double zeta) const {
  check_index(l);
  check_zeta(zeta);
  // int_0^zeta phi_l = (phi_{l-1} - phi_{l+1}) / (2(2l+1))
  std::vector<double> phi(l + 2);
  shifted_legendre_values(zeta, phi);
  return (phi[l - 1] - phi[l + 1]) / (2.0 * (2.0 * l + 1.0));
}

std::span<const double> BasisSet::monomial_coefficients(int l) const {
  check_index(l);
  return monomials_[l];
}

int tensor_quadrature_nodes(int order) { return (3 * order + 2 + 1) / 2 + 2; }

namespace {

// One rule for every order: the node count of the largest order. Sharing the
// rule makes the tensors of order M an exact sub-block of those of order M+1,
// which keeps lower-order profiles bit-identical across model orders.
const QuadratureRule& tensor_rule() {
  static const QuadratureRule rule = gauss_legendre_unit(tensor_quadrature_nodes(kMaxOrder));
  return rule;
}

}  // namespace

ClosureTensors build_tensors(int order) {
  if (order < 0 || order > kMaxOrder) {
    throw std::out_of_range("build_tensors: order " + std::to_string(order) + " outside [0, " +
                            std::to_string(kMaxOrder) + "]");
  }
  ClosureTensors t;
  t.order_ = order;
  const std::size_t m = order;
  t.a_.assign(m * m * m, 0.0);
  t.b_.assign(m * m * m, 0.0);
  t.gamma_.assign(m * m, 0.0);
  t.phi_one_.assign(m, 0.0);
  if (order == 0) return t;

  const QuadratureRule& rule = tensor_rule();
  const std::size_t nq = rule.nodes.size();
  // phi, phi', int_0^zeta phi at every node, indices 0..M
  std::vector<double> phi((m + 2) * nq), dphi((m + 1) * nq), iphi((m + 1) * nq);
  std::vector<double> tmp(m + 2);
  for (std::size_t q = 0; q < nq; ++q) {
    shifted_legendre_values(rule.nodes[q], tmp);
    for (std::size_t l = 0; l <= m + 1; ++l) phi[l * nq + q] = tmp[l];
    for (std::size_t l = 0; l <= m; ++l) {
      double d = 0.0;
      for (int k = static_cast<int>(l) - 1; k >= 0; k -= 2) d += (2.0 * k + 1.0) * tmp[k];
      dphi[l * nq + q] = -2.0 * d;
      iphi[l * nq + q] = l == 0 ? rule.nodes[q] : (tmp[l - 1] - tmp[l + 1]) / (2.0 * (2.0 * l + 1.0));
    }
  }
  auto snap = [](double x) { return std::abs(x) < 1e-12 ? 0.0 : x; };

  for (std::size_t i = 1; i <= m; ++i) {
    const double scale = 2.0 * i + 1.0;
    for (std::size_t l = 1; l <= m; ++l) {
      double g = 0.0;
      for (std::size_t q = 0; q < nq; ++q) {
        g += rule.weights[q] * rule.nodes[q] * phi[i * nq + q] * dphi[l * nq + q];
      }
      t.gamma_[(i - 1) * m + (l - 1)] = snap(scale * g);
      for (std::size_t n = 1; n <= m; ++n) {
        double a = 0.0, b = 0.0;
        for (std::size_t q = 0; q < nq; ++q) {
          const double w = rule.weights[q];
          a += w * phi[i * nq + q] * (phi[l * nq + q] * phi[n * nq + q]);
          b += w * dphi[i * nq + q] * iphi[l * nq + q] * phi[n * nq + q];
        }
        const std::size_t idx = ((i - 1) * m + (l - 1)) * m + (n - 1);
        t.a_[idx] = snap(scale * a);
        t.b_[idx] = snap(scale * b);
      }
    }
  }
  shifted_legendre_values(1.0, tmp);
  for (std::size_t l = 1; l <= m; ++l) t.phi_one_[l - 1] = tmp[l];
  return t;
}

ProjectedProfile project_profile(const std::function<double(double)>& profile, int order) {
  if (order < 0 || order > kMaxOrder) {
    throw std::out_of_range("project_profile: order " + std::to_string(order) + " outside [0, " +
                            std::to_string(kMaxOrder) + "]");
  }
  using Integrator = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto integrate = [&](auto&& f) {
    double err = 0.0;
    const double value = Integrator::integrate(f, 0.0, 1.0, 15, 1e-14, &err);
    if (!std::isfinite(value)) throw std::domain_error("project_profile: non-finite profile value");
    return value;
  };
  auto checked = [&](double zeta) {
    const double v = profile(zeta);
    if (!std::isfinite(v)) throw std::domain_error("project_profile: non-finite profile value");
    return v;
  };

  ProjectedProfile out;
  out.mean = integrate(checked);
  out.moments.resize(order);
  for (int i = 1; i <= order; ++i) {
    const double moment = integrate([&](double zeta) {
      std::vector<double> phi(i + 1);
      shifted_legendre_values(zeta, phi);
      return phi[i] * checked(zeta);
    });
    out.moments[i - 1] = (2.0 * i + 1.0) * moment;
  }
  return out;
}

double eval_profile(double mean, std::span<const double> moments, double zeta) {
  std::vector<double> phi(moments.size() + 1);
  shifted_legendre_values(zeta, phi);
  double v = mean;
  for (std::size_t l = 0; l < moments.size(); ++l) v += moments[l] * phi[l + 1];
  return v;
}

}  // namespace mrswme
