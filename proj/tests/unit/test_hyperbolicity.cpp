#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "mrswme/hyperbolicity.hpp"

using namespace mrswme;

namespace {

double residual(const std::array<double, 4>& c, std::complex<double> x) {
  return std::abs((((x + c[0]) * x + c[1]) * x + c[2]) * x + c[3]);
}

double max_coeff(const std::array<double, 4>& c) {
  double m = 1.0;
  for (double x : c) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("quartic at zero field") {
  const Roots4 r = quartic_roots(0.0, 0.0, 0.0, 1.0);
  std::vector<double> re;
  for (const auto& x : r) {
    CHECK(std::abs(x.imag()) < 1e-12);
    re.push_back(x.real());
  }
  std::sort(re.begin(), re.end());
  CHECK(re[0] == doctest::Approx(-std::sqrt(3.0)));
  CHECK(std::abs(re[1]) < 1e-12);
  CHECK(std::abs(re[2]) < 1e-12);
  CHECK(re[3] == doctest::Approx(std::sqrt(3.0)));
  CHECK(roots_real(r));
}

TEST_CASE("quartic coefficients") {
  const auto c = quartic_coefficients(2.0, 0.5, -1.0, 1.0);
  CHECK(c[0] == 0.0);
  CHECK(c[1] == doctest::Approx(-3.0 * (12.0 / 5.0 + 1.0 + 0.75 + 1.0)));
  CHECK(c[2] == doctest::Approx(72.0));
  CHECK(c[3] == doctest::Approx(27.0 * 4.0 * (3.0 - 0.25 - 3.0)));
}

TEST_CASE("zero field slice is real for generic moments") {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> U(-10.0, 10.0), G(0.01, 10.0);
  for (int i = 0; i < 2000; ++i) {
    const double bt = U(rng), et = U(rng), gh = G(rng);
    const Roots4 r = quartic_roots(0.0, bt, et, gh);
    CHECK(roots_real(r));
    // closed form: 0, 0, +-sqrt(3(1 + 3B^2 + E^2))
    double top = 0.0;
    for (const auto& x : r) top = std::max(top, x.real());
    CHECK(top == doctest::Approx(std::sqrt(3.0 * (1.0 + 3.0 * bt * bt + et * et))));
  }
}

TEST_CASE("root residual and Vieta relations") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> B(-5.0, 5.0), T(-10.0, 10.0), G(0.05, 5.0);
  long bad = 0;
  for (int i = 0; i < 100000; ++i) {
    const double b = B(rng), bt = T(rng), et = T(rng), gh = G(rng);
    const auto c = quartic_coefficients(b, bt, et, gh);
    const Roots4 r = quartic_roots(b, bt, et, gh);
    const double scale = max_coeff(c);
    for (const auto& x : r) {
      if (residual(c, x) > 1e-9 * scale) ++bad;
    }
    if (i % 1000 == 0) {
      std::complex<double> sum = 0.0, prod = 1.0;
      for (const auto& x : r) sum += x, prod *= x;
      CHECK(std::abs(sum) <= 1e-9 * std::sqrt(scale));
      CHECK(std::abs(prod - c[3]) <= 1e-9 * scale);
    }
  }
  CHECK(bad == 0);
}

TEST_CASE("verdict symmetric under joint sign flip") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> B(-5.0, 5.0), T(-10.0, 10.0);
  for (int i = 0; i < 2000; ++i) {
    const double b = B(rng), bt = T(rng), et = T(rng);
    CHECK(roots_real(quartic_roots(b, bt, et, 1.0)) == roots_real(quartic_roots(b, -bt, -et, 1.0)));
  }
}

TEST_CASE("Jacobian verdicts") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> H(0.1, 5.0), V(-2.0, 2.0);
  SUBCASE("zeroth order is always hyperbolic") {
    ModelParams p;
    const MomentModel m(p);
    for (int i = 0; i < 1000; ++i) {
      const double h = H(rng);
      const std::vector<double> u = {h, h * V(rng), h * V(rng), h * V(rng), h * V(rng)};
      const HypVerdict v = is_hyperbolic(m, u, 1e-8);
      CHECK(v.hyperbolic);
      CHECK(v.max_im_ratio == 0.0);
    }
  }
  SUBCASE("first order without mean field is hyperbolic") {
    ModelParams p;
    p.order = 1;
    const MomentModel m(p);
    for (int i = 0; i < 1000; ++i) {
      const double h = H(rng);
      std::vector<double> u(9);
      u[0] = h;
      for (int k = 1; k < 9; ++k) u[k] = h * V(rng);
      u[StateLayout::kHb] = 0.0;
      CHECK(is_hyperbolic(m, u, 1e-6).hyperbolic);
    }
  }
  SUBCASE("a point inside the non-hyperbolic region") {
    // located by scanning both classifiers over the figure ranges
    const Roots4 r = quartic_roots(5.0, 0.0, 3.0, 1.0);
    CHECK_FALSE(roots_real(r));
    ModelParams p;
    p.order = 1;
    const MomentModel m(p);
    const HypVerdict v = is_hyperbolic(m, first_order_state(5.0, 0.0, 3.0, 1.0, 1.0), 1e-6);
    CHECK_FALSE(v.hyperbolic);
    CHECK(v.max_im_ratio > 1e-3);
  }
}

TEST_CASE("first order state") {
  const auto u = first_order_state(3.0, 0.5, -0.25, 2.0, 4.0);
  REQUIRE(u.size() == 9u);
  CHECK(u[0] == 0.5);
  CHECK(u[StateLayout::kHb] == 1.5);
  CHECK(u[StateLayout::beta(1)] == doctest::Approx(0.5 * 0.5 * std::sqrt(11.0)));
  CHECK(u[StateLayout::eta(1)] == doctest::Approx(-0.25 * 0.5 * std::sqrt(11.0)));
  CHECK(u[StateLayout::kHv] == 0.0);
}

TEST_CASE("region scan") {
  const ScanResult r = scan_region({-5, 5, 51}, {-10, 10, 51}, {-10, 10, 51}, 1.0);
  REQUIRE(r.samples.size() == 51u * 51u * 51u);
  CHECK(r.non_hyperbolic > 0);
  long zero_slice = 0;
  for (const auto& s : r.samples) {
    if (s.b_m == 0.0) {
      ++zero_slice;
      CHECK(s.hyperbolic);
    }
    CHECK(s.max_im_ratio >= 0.0);
  }
  CHECK(zero_slice == 51 * 51);
  // ordering: eta fastest
  CHECK(r.samples[1].eta_tilde == doctest::Approx(-9.6));
  CHECK(r.samples[51].beta_tilde == doctest::Approx(-9.6));

  // symmetry under (beta, eta) -> (-beta, -eta)
  for (int i = 0; i < 51; i += 5) {
    for (int j = 0; j < 51; ++j) {
      for (int k = 0; k < 51; ++k) {
        const auto& a = r.samples[(i * 51 + j) * 51 + k];
        const auto& b = r.samples[(i * 51 + 50 - j) * 51 + 50 - k];
        CHECK(a.hyperbolic == b.hyperbolic);
      }
    }
  }

  std::ostringstream os;
  write_scan_csv(os, scan_region({0, 1, 2}, {0, 0, 1}, {0, 0, 1}, 1.0));
  // b_m = 1: l^4 - 7.5 l^2 + 81 has no real root
  CHECK(os.str().rfind("b_m,beta_tilde,eta_tilde,hyperbolic,max_im_ratio\n0,0,0,1,0\n1,0,0,0,", 0) == 0);
  CHECK_THROWS_AS(scan_region({0, 1, 2}, {0, 1, 2}, {0, 1, 2}, 0.0), std::invalid_argument);
}

TEST_CASE("quartic and Jacobian agreement (advisory)") {
  const ScanResult r = scan_region({-2, 2, 9}, {-4, 4, 9}, {-4, 4, 9}, 1.0);
  const AgreementReport rep = quartic_jacobian_agreement(r.samples, 1.0, 1e-6);
  MESSAGE("quartic/Jacobian verdict agreement: " << rep.agree << " / " << rep.samples);
  CHECK(rep.samples == 9 * 9 * 9);
}
