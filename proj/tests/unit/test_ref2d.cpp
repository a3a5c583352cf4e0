#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "mrswme/errors.hpp"
#include "mrswme/fv1d.hpp"
#include "mrswme/ref2d.hpp"

using namespace mrswme;

namespace {

constexpr double kPi = std::numbers::pi;

Grid2D periodic_grid(int ny, int nz) {
  Grid2D g;
  g.y_min = -1.0;
  g.y_max = 1.0;
  g.n_y = ny;
  g.n_zeta = nz;
  g.boundary = Boundary::periodic;
  return g;
}

// primitive field (h, u, v, a, b) at (y, zeta)
template <class F>
RefState2D fill(const Grid2D& g, F prim) {
  RefState2D s(g);
  for (int j = 0; j < g.n_y; ++j) {
    for (int k = 0; k < g.n_zeta; ++k) {
      const auto p = prim(g.y_center(j), g.zeta_center(k));
      auto c = s.cell(j, k);
      c[0] = p[0];
      for (int q = 1; q < 5; ++q) c[q] = p[0] * p[q];
    }
  }
  return s;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("horizontal and vertical fluxes") {
  const double u[5] = {2.0, 0.6, -0.4, 0.2, 0.8};  // h=2, u=.3, v=-.2, a=.1, b=.4
  const Vec5 gy = flux_y(u, 9.81);
  CHECK(gy[0] == doctest::Approx(-0.4));
  CHECK(gy[1] == doctest::Approx(2.0 * (0.3 * -0.2 - 0.1 * 0.4)));
  CHECK(gy[2] == doctest::Approx(2.0 * (0.04 - 0.16) + 0.5 * 9.81 * 4.0));
  CHECK(gy[3] == doctest::Approx(2.0 * (0.1 * -0.2 - 0.4 * 0.3)));
  CHECK(gy[4] == 0.0);

  const Vec5 hz = flux_zeta(u, 0.5, -0.25);
  CHECK(hz[0] == doctest::Approx(1.0));
  CHECK(hz[1] == doctest::Approx(0.3 - 0.2 * -0.25));
  CHECK(hz[2] == doctest::Approx(-0.2 - 0.8 * -0.25));
  CHECK(hz[3] == doctest::Approx(0.1 - 0.6 * -0.25));
  CHECK(hz[4] == doctest::Approx(0.4 + 0.4 * -0.25));
}

TEST_CASE("divergence limiter") {
  CHECK(divergence_limiter(0.5, 1.0) == 0.5);
  CHECK(divergence_limiter(2.0, 1.0) == 1.0);
  CHECK(divergence_limiter(-0.5, -2.0) == 0.25);
  CHECK(divergence_limiter(-0.5, 2.0) == 0.0);
  CHECK(divergence_limiter(0.0, 2.0) == 0.0);
  CHECK(divergence_limiter(1.0, 0.0) == 0.0);
}

TEST_CASE("magnetic vertical coupling") {
  SUBCASE("uniform slopes") {
    const std::vector<double> sb(4, 1.0);
    const CouplingC c = coupling_C(sb, 0.25);
    const double center[4] = {-0.125, -0.375, -0.625, -0.875};
    for (int k = 0; k < 4; ++k) {
      CHECK(c.center[k] == doctest::Approx(center[k]));
      CHECK(c.up[k] == doctest::Approx(center[k] - 0.125));
      CHECK(c.down[k] == doctest::Approx(center[k] + 0.125));
    }
    CHECK(c.down[0] == doctest::Approx(0.0));
  }
  SUBCASE("continuous across interfaces, locally divergence free") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    std::vector<double> sb(16);
    for (double& x : sb) x = U(rng);
    const double dz = 1.0 / 16;
    const CouplingC c = coupling_C(sb, dz);
    CHECK(std::abs(c.down[0]) < 1e-15);
    for (int k = 0; k < 16; ++k) {
      CHECK(std::abs(sb[k] + (c.up[k] - c.down[k]) / dz) <= 1e-12 * std::abs(sb[k]) + 1e-15);
      if (k > 0) CHECK(c.down[k] == doctest::Approx(c.up[k - 1]).epsilon(1e-13));
    }
    // hC(zeta) = -int_0^zeta sigma B
    double integral = 0.0;
    for (int k = 0; k < 16; ++k) integral += sb[k] * dz;
    CHECK(c.up[15] == doctest::Approx(-integral).epsilon(1e-13));
  }
}

TEST_CASE("velocity coupling") {
  SUBCASE("y-uniform divergence gives zero omega") {
    const std::vector<double> d(8, 0.7), h(8, 1.3);
    const auto w = coupling_omega(d, h, h, 1.0 / 8, 1e-10);
    REQUIRE(w.size() == 9u);
    for (double x : w) CHECK(std::abs(x) < 1e-15);
  }
  SUBCASE("independent partial sums") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0), H(0.5, 2.0);
    const int n = 10;
    const double dz = 0.1;
    std::vector<double> d(n), hu(n), hd(n);
    for (int k = 0; k < n; ++k) d[k] = U(rng), hu[k] = H(rng), hd[k] = H(rng);
    const auto w = coupling_omega(d, hu, hd, dz, 1e-10);
    double mean = 0.0;
    for (double x : d) mean += x * dz;
    CHECK(w[0] == 0.0);
    CHECK(w[n] == 0.0);
    for (int k = 1; k < n; ++k) {
      double sum = 0.0;
      for (int l = 0; l < k; ++l) sum += dz * mean - dz * d[l];
      CHECK(w[k] == doctest::Approx(2.0 * sum / (hd[k] + hu[k - 1])).epsilon(1e-13));
    }
  }
  SUBCASE("second-order convergence to the continuous integral") {
    // d = cos(pi zeta), h = 1: omega(zeta) = -sin(pi zeta)/pi
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
      std::vector<double> d(n), h(n, 1.0);
      const double dz = 1.0 / n;
      for (int k = 0; k < n; ++k) d[k] = std::cos(kPi * (k + 0.5) * dz);
      const auto w = coupling_omega(d, h, h, dz, 1e-10);
      double err = 0.0;
      for (int k = 0; k <= n; ++k) err = std::max(err, std::abs(w[k] + std::sin(kPi * k * dz) / kPi));
      if (prev > 0.0) CHECK(std::log2(prev / err) > 1.9);
      prev = err;
    }
  }
  SUBCASE("degenerate depth") {
    const std::vector<double> d = {1.0, 0.0}, h = {0.0, 0.0};
    CHECK_THROWS_AS(coupling_omega(d, h, h, 0.5, 1e-10), SolverError);
  }
}

TEST_CASE("states at rest and y-uniform states are stationary") {
  RefOptions opt;
  SUBCASE("rest") {
    const Grid2D g = periodic_grid(8, 6);
    RefSolver solver(opt, g);
    RefState2D s = fill(g, [](double, double) { return std::array<double, 5>{1.0, 0, 0, 0, 0}; });
    std::vector<double> du, db;
    const auto d = solver.rhs(s, du, db);
    CHECK(max_abs(du) == 0.0);
    CHECK(max_abs(db) == 0.0);
    CHECK(max_abs(d.omega) == 0.0);
  }
  SUBCASE("vertical shear without y dependence") {
    const Grid2D g = periodic_grid(8, 10);
    RefSolver solver(opt, g);
    RefState2D s = fill(g, [](double, double z) {
      return std::array<double, 5>{1.5, 0.1 * z, 0.25 * std::sin(2 * kPi * z), 0.2 - 0.1 * z, 1.1 - 0.3 * z * z};
    });
    solver.init_divergence_field(s);
    CHECK(max_abs(s.B) == 0.0);
    std::vector<double> du, db;
    solver.rhs(s, du, db);
    CHECK(max_abs(du) < 1e-14);
    CHECK(max_abs(db) == 0.0);
  }
}

TEST_CASE("zeta-independent data follows the depth-averaged system") {
  const Grid2D g = periodic_grid(64, 8);
  RefOptions opt;
  opt.theta = 1.3;
  RefSolver ref(opt, g);
  auto prim = [](double y) {
    return std::array<double, 5>{1.0 + 0.2 * std::sin(kPi * y), 0.1 * std::cos(kPi * y),
                                 0.3 * std::sin(kPi * y + 0.4), 0.2 * std::cos(kPi * y), 0.0};
  };
  RefState2D s = fill(g, [&](double y, double) { return prim(y); });

  ModelParams mp;
  mp.order = 0;
  MomentModel model(mp);
  Grid1D g1{g.y_min, g.y_max, g.n_y, g.boundary};
  Fv1dOptions o1;
  o1.theta = opt.theta;
  Fv1dSolver fv(model, g1, o1);
  Solution1D sol(g1, 0);
  for (int j = 0; j < g1.n_cells; ++j) {
    const auto p = prim(g1.center(j));
    auto c = sol.cell(j);
    c[0] = p[0];
    for (int q = 1; q < 5; ++q) c[q] = p[0] * p[q];
  }
  const double dt = 0.4 * fv.cfl_dt(sol);
  ref.advance_fixed(s, dt, 40);
  fv.advance_fixed(sol, dt, 40);

  const DepthAverage avg = depth_average(s);
  double err = 0.0;
  for (int j = 0; j < g.n_y; ++j) {
    const auto c = sol.cell(j);
    err += g.dy() * (std::abs(avg.h[j] - c[0]) + std::abs(avg.u_m[j] - c[1] / c[0]) +
                     std::abs(avg.v_m[j] - c[2] / c[0]) + std::abs(avg.a_m[j] - c[3] / c[0]) +
                     std::abs(avg.b_m[j] - c[4] / c[0]));
  }
  CHECK(err <= 1e-8);
  // columns stay vertically uniform
  for (int j = 0; j < g.n_y; ++j) {
    for (int k = 1; k < g.n_zeta; ++k) {
      for (int q = 0; q < 5; ++q) CHECK(std::abs(s.cell(j, k)[q] - s.cell(j, 0)[q]) < 1e-12);
    }
  }
}

TEST_CASE("mass conservation and divergence residual") {
  const Grid2D g = periodic_grid(40, 12);
  RefOptions opt;
  opt.coriolis = [](double) { return 1.0; };
  RefSolver solver(opt, g);
  RefState2D s = fill(g, [](double y, double z) {
    return std::array<double, 5>{1.0 + 0.3 * std::exp(-8.0 * y * y), 0.1 * std::sin(kPi * y),
                                 0.2 * (z - 0.5) + 0.1 * std::cos(kPi * y),
                                 0.05 * z, (0.5 + 0.2 * std::sin(kPi * y)) * (1.0 + 0.3 * z)};
  });
  solver.init_divergence_field(s);
  CHECK(max_abs(s.B) > 0.1);
  auto mass = [&] {
    double m = 0.0;
    for (int j = 0; j < g.n_y; ++j)
      for (int k = 0; k < g.n_zeta; ++k) m += s.cell(j, k)[0];
    return m;
  };
  const double m0 = mass();
  solver.advance(s, 0.2);
  CHECK(s.time == 0.2);
  CHECK(std::abs(mass() - m0) <= 1e-13 * m0);
  CHECK(solver.stats().max_div_ratio <= 1e-12);
  CHECK(solver.stats().max_div_residual > 0.0);
  CHECK(solver.stats().steps > 0);
}

TEST_CASE("initial divergence field is the limited slope of hb") {
  const Grid2D g = periodic_grid(8, 4);
  RefSolver solver(RefOptions{}, g);
  RefState2D s = fill(g, [](double y, double) { return std::array<double, 5>{1.0, 0, 0, 0, y}; });
  solver.init_divergence_field(s);
  // linear inside, limited to zero at the periodic kink
  CHECK(s.B[s.index(3, 0)] == doctest::Approx(1.0));
  CHECK(s.B[s.index(0, 0)] == 0.0);
  CHECK(s.B[s.index(7, 0)] == 0.0);
}

TEST_CASE("depth averages") {
  Grid2D g = periodic_grid(4, 4);
  RefState2D s = fill(g, [](double, double z) {
    return std::array<double, 5>{1.0 + z, 2.0, z, -1.0, 0.5};
  });
  const DepthAverage d = depth_average(s);
  // int (1+z) dz = 1.5 and int (1+z) z dz = 1/2 + 1/3 (exact under midpoint up to 1/(12*16))
  CHECK(d.h[0] == doctest::Approx(1.5));
  CHECK(d.u_m[0] == doctest::Approx(2.0));
  CHECK(d.a_m[0] == doctest::Approx(-1.0));
  CHECK(d.b_m[0] == doctest::Approx(0.5));
  CHECK(d.v_m[0] == doctest::Approx((0.5 + 1.0 / 3.0 - 1.0 / 192.0) / 1.5));
}

TEST_CASE("profile slices") {
  Grid2D g = periodic_grid(10, 4);  // dy = 0.2
  CHECK(slice_column(g, -0.95) == 0);
  CHECK(slice_column(g, 0.0) == 4);   // boundary between 4 and 5
  CHECK(slice_column(g, 0.2 + 1e-12) == 5);
  CHECK(slice_column(g, -1.0) == 0);
  CHECK(slice_column(g, 1.0) == 9);
  CHECK(slice_column(g, 5.0) == 9);
  CHECK(slice_column(g, -5.0) == 0);
  RefState2D s = fill(g, [](double y, double z) { return std::array<double, 5>{2.0, y, z, 0, 1}; });
  const ProfileSlice p = profile_slice(s, 0.05);
  CHECK(p.j == 5);
  CHECK(p.y == doctest::Approx(0.1));
  REQUIRE(p.zeta.size() == 4u);
  CHECK(p.u[2] == doctest::Approx(0.1));
  CHECK(p.v[1] == doctest::Approx(0.375));
}

TEST_CASE("writers") {
  Grid2D g = periodic_grid(4, 4);
  RefState2D s = fill(g, [](double, double) { return std::array<double, 5>{1.0, 0.5, 0, 0, 0.25}; });
  std::ostringstream a, b;
  write_reference_csv(a, s);
  write_depth_average_csv(b, depth_average(s));
  CHECK(a.str().rfind("y,zeta,h,u,v,a,b\n-0.75,0.125,1,0.5,0,0,0.25\n", 0) == 0);
  CHECK(b.str().rfind("y,h,u_m,v_m,a_m,b_m\n-0.75,1,0.5,0,0,0.25\n", 0) == 0);
}

TEST_CASE("invalid configuration and failures") {
  Grid2D g = periodic_grid(2, 4);
  CHECK_THROWS_AS(RefSolver(RefOptions{}, g), std::invalid_argument);
  g = periodic_grid(8, 4);
  RefOptions o;
  o.theta = 2.5;
  CHECK_THROWS_AS(RefSolver(o, g), std::invalid_argument);
  o.theta = 1.0;
  o.cfl = 0.6;
  CHECK_THROWS_AS(RefSolver(o, g), std::invalid_argument);
  RefSolver solver(RefOptions{}, g);
  RefState2D s = fill(g, [](double, double) { return std::array<double, 5>{1.0, 0, 0, 0, 0}; });
  s.cell(3, 2)[0] = -1.0;
  CHECK_THROWS_AS(solver.advance(s, 0.1), SolverError);
}
