#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mrswme/errors.hpp"
#include "mrswme/model1d.hpp"

using namespace mrswme;
using L = StateLayout;

namespace {

MomentModel make_model(int order, double g = 1.0) {
  ModelParams p;
  p.order = order;
  p.g = g;
  return MomentModel(p);
}

// random valid state with moments of moderate size
std::vector<double> random_state(int order, std::mt19937_64& rng, double scale = 0.5) {
  std::uniform_real_distribution<double> hd(0.5, 2.0);
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> s(5 + 4 * order);
  s[0] = hd(rng);
  for (std::size_t k = 1; k < s.size(); ++k) s[k] = s[0] * u(rng);
  return s;
}

bool spectrum_contains(const Eigen::VectorXcd& lambda, double value, double tol) {
  for (const auto& z : lambda) {
    if (std::abs(z - std::complex<double>(value, 0.0)) <= tol) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("order zero flux at rest") {
  auto m = make_model(0);
  const std::vector<double> u = {2, 0, 0, 0, 0};
  const auto g = m.flux(u);
  CHECK(g == std::vector<double>{0, 0, 2, 0, 0});
}

TEST_CASE("order zero flux is the MRSW flux") {
  auto m = make_model(0, 9.81);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    auto s = random_state(0, rng);
    const double h = s[0], u = s[1] / h, v = s[2] / h, a = s[3] / h, b = s[4] / h;
    const auto g = m.flux(s);
    CHECK(g[0] == doctest::Approx(h * v));
    CHECK(g[1] == doctest::Approx(h * u * v - h * a * b));
    CHECK(g[2] == doctest::Approx(h * v * v + 0.5 * 9.81 * h * h - h * b * b));
    CHECK(g[3] == doctest::Approx(h * a * v - h * b * u));
    CHECK(g[4] == 0.0);
  }
}

TEST_CASE("first order flux, source and nonconservative matrix match the written-out system") {
  auto m = make_model(1);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    auto s = random_state(1, rng);
    const double h = s[0], u = s[1] / h, v = s[2] / h, a = s[3] / h, b = s[4] / h;
    const double al = s[5] / h, be = s[6] / h, ga = s[7] / h, et = s[8] / h;
    const auto g = m.flux(s);
    const double expect[] = {
        h * v,
        h * u * v + h * al * be / 3 - h * a * b - h * ga * et / 3,
        h * v * v + h * be * be / 3 - h * b * b - h * et * et / 3 + 0.5 * h * h,
        h * a * v + h * be * ga / 3 - h * b * u - h * al * et / 3,
        0.0,
        h * u * be + h * v * al - h * a * et - h * b * ga,
        2 * h * v * be - 2 * h * b * et,
        h * a * be + h * v * ga - h * b * al - h * u * et,
        0.0};
    for (int k = 0; k < 9; ++k) CHECK(g[k] == doctest::Approx(expect[k]).epsilon(1e-13));

    const Eigen::MatrixXd q = m.noncons_matrix(s);
    Eigen::MatrixXd qe = Eigen::MatrixXd::Zero(9, 9);
    qe(1, 4) = -(a - ga);
    qe(2, 4) = -(b - et);
    qe(3, 4) = -(u - al);
    qe(4, 4) = -(v - be);
    qe(5, 6) = u, qe(5, 8) = -a, qe(5, 4) = -2 * ga;
    qe(6, 6) = v, qe(6, 8) = -b, qe(6, 4) = -2 * et;
    qe(7, 6) = a, qe(7, 8) = -u, qe(7, 4) = -2 * al;
    qe(8, 6) = b, qe(8, 8) = -v, qe(8, 4) = -2 * be;
    CHECK((q - qe).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("source term") {
  auto m0 = make_model(0);
  const std::vector<double> u0 = {1, 2, 3, 0, 0};
  CHECK(m0.source(u0, 0.0, 0.0) == std::vector<double>{0, 0, 0, 0, 0});
  CHECK(m0.source(u0, 1.0, 0.0) == std::vector<double>{0, 3, -2, 0, 0});
  auto m1 = make_model(1);
  const std::vector<double> u1 = {1, 0, 0, 0, 0, 7, 5, 0, 0};
  const auto s = m1.source(u1, 1.0, 0.0);
  CHECK(s[5] == 5.0);
  CHECK(s[6] == -7.0);
  CHECK(s[7] == 0.0);
  CHECK(s[8] == 0.0);
  const std::vector<double> u2 = {2, 0, 0, 0, 0};
  CHECK(m0.source(u2, 0.0, 0.5)[2] == doctest::Approx(-1.0));
}

TEST_CASE("nonconservative matrix at order zero and with zero moments") {
  auto m0 = make_model(0);
  const std::vector<double> u = {2, 0.2, 0.4, 0.6, 0.8};
  auto q = m0.noncons_matrix(u);
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(5, 5);
  e(1, 4) = -0.3, e(2, 4) = -0.4, e(3, 4) = -0.1, e(4, 4) = -0.2;
  CHECK((q - e).cwiseAbs().maxCoeff() < 1e-15);

  auto m2 = make_model(2);
  std::vector<double> u2(13, 0.0);
  std::copy(u.begin(), u.end(), u2.begin());
  auto q2 = m2.noncons_matrix(u2);
  CHECK((q2.block(0, 0, 5, 5) - e).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(q2.col(4).tail(8).cwiseAbs().maxCoeff() == 0.0);

  auto m1 = make_model(1);
  const std::vector<double> u1 = {1, 0, 0, 0.5, 0, 0, 0, 0.3, 0};
  CHECK(m1.noncons_matrix(u1)(1, 4) == doctest::Approx(-(0.5 - 0.3)));
}

TEST_CASE("exact flux Jacobian agrees with finite differences") {
  std::mt19937_64 rng(3);
  for (int order = 0; order <= 3; ++order) {
    auto m = make_model(order, 9.81);
    for (int t = 0; t < 10; ++t) {
      auto s = random_state(order, rng);
      const Eigen::MatrixXd exact = m.flux_jacobian(s);
      const Eigen::MatrixXd fd = m.flux_jacobian_fd(s);
      const double scale = std::max(1.0, exact.cwiseAbs().maxCoeff());
      CHECK((exact - fd).cwiseAbs().maxCoeff() < 1e-6 * scale);

      // directional derivative of G against (J + Q) d
      Eigen::VectorXd d = Eigen::VectorXd::Random(m.size());
      const double eps = 1e-7;
      std::vector<double> sp(s), sm(s);
      for (int k = 0; k < m.size(); ++k) {
        sp[k] += eps * d[k];
        sm[k] -= eps * d[k];
      }
      const auto gp = m.flux(sp), gm = m.flux(sm);
      Eigen::VectorXd dd(m.size());
      for (int k = 0; k < m.size(); ++k) dd[k] = (gp[k] - gm[k]) / (2 * eps);
      const Eigen::VectorXd jd = (m.jacobian(s) + m.noncons_matrix(s)) * d;
      CHECK((dd - jd).norm() < 1e-5 * std::max(1.0, jd.norm()));
    }
  }
}

TEST_CASE("order zero spectrum is material, Alfven and magnetogravity waves") {
  std::mt19937_64 rng(4);
  for (double g : {1.0, 9.81}) {
    auto m = make_model(0, g);
    for (int t = 0; t < 100; ++t) {
      auto s = random_state(0, rng, 1.5);
      const double h = s[0], v = s[2] / h, b = s[4] / h;
      const auto lam = m.eigenvalues(s);
      CHECK(lam.imag().cwiseAbs().maxCoeff() < 1e-10);
      const double c = std::sqrt(b * b + g * h);
      for (double expect : {v, v - std::abs(b), v + std::abs(b), v - c, v + c}) {
        CHECK(spectrum_contains(lam, expect, 1e-10));
      }
    }
  }
}

TEST_CASE("rest state spectrum") {
  auto m = make_model(0);
  const std::vector<double> u = {1, 0, 0, 0, 0};
  const auto lam = m.eigenvalues(u);
  CHECK(spectrum_contains(lam, 1.0, 1e-12));
  CHECK(spectrum_contains(lam, -1.0, 1e-12));
  int zeros = 0;
  for (const auto& z : lam) zeros += std::abs(z) < 1e-12;
  CHECK(zeros == 3);
}

TEST_CASE("first order spectrum contains the five closed-form speeds") {
  auto m = make_model(1);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    auto s = random_state(1, rng);
    const double h = s[0], v = s[2] / h, b = s[4] / h, be = s[6] / h, et = s[8] / h;
    const auto lam = m.eigenvalues(s);
    const double r3 = 1.0 / std::sqrt(3.0);
    for (double expect : {v - be, v - b + r3 * std::abs(be - et), v - b - r3 * std::abs(be - et),
                          v + b + r3 * std::abs(be + et), v + b - r3 * std::abs(be + et)}) {
      CHECK(spectrum_contains(lam, expect, 1e-8));
    }
  }
}

TEST_CASE("local speeds") {
  auto m = make_model(0);
  const std::vector<double> rest = {1, 0, 0, 0, 0};
  auto s = m.local_speeds(rest, rest);
  CHECK(s.s_minus == doctest::Approx(-1.0));
  CHECK(s.s_plus == doctest::Approx(1.0));

  const std::vector<double> mag = {1, 0, 0, 0, 1.1};
  s = m.local_speeds(mag, mag);
  CHECK(s.s_minus == doctest::Approx(-std::sqrt(2.21)).epsilon(1e-12));
  CHECK(s.s_plus == doctest::Approx(std::sqrt(2.21)).epsilon(1e-12));

  const std::vector<double> fast = {1, 0, 5, 0, 0};
  s = m.local_speeds(fast, fast);
  CHECK(s.s_minus == 0.0);
  CHECK(s.s_plus == doctest::Approx(6.0));

  std::mt19937_64 rng(6);
  auto m2 = make_model(2);
  for (int t = 0; t < 50; ++t) {
    auto a = random_state(2, rng, 0.2), b = random_state(2, rng, 0.2);
    auto ls = m2.local_speeds(a, b);
    CHECK(ls.s_minus <= 0.0);
    CHECK(ls.s_plus >= 0.0);
  }
}

TEST_CASE("strongly complex spectra abort") {
  ModelParams p;
  p.order = 1;
  p.tol_im = 0.0;
  MomentModel m(p);
  // scan for a state with complex eigenvalues
  std::mt19937_64 rng(8);
  bool found = false;
  for (int t = 0; t < 2000 && !found; ++t) {
    auto s = random_state(1, rng, 3.0);
    const double r = imaginary_ratio(m.eigenvalues(s));
    if (r > 1e-6) {
      found = true;
      CHECK_THROWS_AS(m.local_speeds(s, s), HyperbolicityError);
    }
  }
  CHECK(found);
}

TEST_CASE("invalid states are rejected") {
  auto m = make_model(1);
  std::vector<double> u(9, 0.0);
  CHECK_THROWS_AS(m.flux(u), SolverError);
  u[0] = 1e-11;
  CHECK_THROWS_AS(m.noncons_matrix(u), SolverError);
  u[0] = 1.0;
  u[3] = std::nan("");
  CHECK_THROWS_AS(m.flux_jacobian(u), SolverError);
  CHECK_THROWS_AS(m.flux(std::vector<double>(5, 1.0)), SolverError);
}

TEST_CASE("flux hierarchy agrees on the shared components") {
  std::mt19937_64 rng(9);
  auto m1 = make_model(1);
  auto m3 = make_model(3);
  for (int t = 0; t < 10; ++t) {
    auto s1 = random_state(1, rng);
    std::vector<double> s3(17, 0.0);
    std::copy(s1.begin(), s1.end(), s3.begin());
    const auto g1 = m1.flux(s1), g3 = m3.flux(s3);
    for (int k = 0; k < 9; ++k) CHECK(g3[k] == doctest::Approx(g1[k]).epsilon(1e-14));
    // trailing blocks are generally not zero: A_{2,1,1} couples the first
    // moment into the second moment equation
  }
}

TEST_CASE("without magnetic data the magnetic rows vanish") {
  std::mt19937_64 rng(10);
  for (int order = 0; order <= 3; ++order) {
    auto m = make_model(order);
    auto s = random_state(order, rng);
    s[L::kHa] = s[L::kHb] = 0.0;
    for (int l = 1; l <= order; ++l) s[L::gamma(l)] = s[L::eta(l)] = 0.0;
    const auto g = m.flux(s);
    CHECK(g[L::kHa] == 0.0);
    CHECK(g[L::kHb] == 0.0);
    for (int l = 1; l <= order; ++l) {
      CHECK(g[L::gamma(l)] == 0.0);
      CHECK(g[L::eta(l)] == 0.0);
    }
    // Q U_y has no magnetic component when the magnetic gradients vanish
    Eigen::VectorXd d = Eigen::VectorXd::Random(m.size());
    d[L::kHa] = d[L::kHb] = 0.0;
    for (int l = 1; l <= order; ++l) d[L::gamma(l)] = d[L::eta(l)] = 0.0;
    const Eigen::VectorXd qd = m.noncons_matrix(s) * d;
    CHECK(qd[L::kHa] == 0.0);
    CHECK(qd[L::kHb] == 0.0);
    CHECK(qd[L::kHu] == 0.0);
    CHECK(qd[L::kHv] == 0.0);
    for (int l = 1; l <= order; ++l) {
      CHECK(qd[L::gamma(l)] == 0.0);
      CHECK(qd[L::eta(l)] == 0.0);
    }
  }
}
