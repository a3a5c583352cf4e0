#include "mrswme/experiments.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "mrswme/closure.hpp"
#include "mrswme/errors.hpp"

namespace mrswme {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

int case_index(const std::string& c) {
  if (c == "constant") return 0;
  if (c == "linear") return 1;
  if (c == "quadratic") return 2;
  if (c == "cubic") return 3;
  return -1;
}

double phi(int l, double zeta) {
  std::vector<double> v(l + 1);
  shifted_legendre_values(zeta, v);
  return v[l];
}

double bump_depth(double y) { return 1.0 + std::exp(3.0 * std::cos(kPi * (y + 0.5)) - 4.0); }

double tanh_jet(double y) {
  const double d = 1.0 + std::tanh(2.0);
  return 1.1 * (1.0 + std::tanh(4.0 * y + 2.0)) * (1.0 - std::tanh(4.0 * y - 2.0)) / (d * d);
}

void bump_setup(ExperimentSpec& s, int k, bool magnetic) {
  s.y_min = -1.0;
  s.y_max = 1.0;
  s.n_y = 200;
  s.n_zeta = 100;
  s.boundary = Boundary::periodic;
  s.theta = magnetic ? 1.3 : 1.0;
  s.snapshot_times = {magnetic ? 1.5 : 2.0};
  s.profile_y = {-0.4};
  s.reference_initial = [k, magnetic](double y, double z) {
    const double h = bump_depth(y);
    const double shape = k > 0 ? phi(k, z) : 0.0;
    const double b = magnetic ? (1.1 - 0.25 * shape) / h : 0.0;
    return std::array<double, 5>{h, 0.0, 0.25 - 0.25 * shape, 0.0, b};
  };
  s.moment_initial = [k, magnetic](double y, int order, std::span<double> u) {
    std::fill(u.begin(), u.end(), 0.0);
    const double h = bump_depth(y);
    u[StateLayout::kH] = h;
    u[StateLayout::kHv] = 0.25 * h;
    if (magnetic) u[StateLayout::kHb] = 1.1;
    if (k > 0 && k <= order) {
      u[StateLayout::beta(k)] = -0.25 * h;
      if (magnetic) u[StateLayout::eta(k)] = -0.25;
    }
  };
}

void adjustment_setup(ExperimentSpec& s, bool high_rossby) {
  s.y_min = -20.0;
  s.y_max = 20.0;
  s.n_y = 800;
  s.n_zeta = 100;
  s.boundary = Boundary::outflow;
  s.theta = 1.3;
  s.coriolis = [](double) { return 1.0; };
  s.snapshot_times = {5.0, 10.0};
  s.profile_y = {-5.0};
  const double b0 = high_rossby ? 1.1 : 0.1;
  auto u_of = [high_rossby](double y) { return high_rossby ? tanh_jet(y) : 0.1 * std::exp(-y * y); };
  auto v_of = [](double z) { return 0.25 * std::sin(2.0 * kPi * z); };
  s.reference_initial = [=](double y, double z) {
    return std::array<double, 5>{1.0, u_of(y), v_of(z), 0.0, b0};
  };
  const ProjectedProfile p = project_profile(v_of, kMaxOrder);
  s.moment_initial = [=](double y, int order, std::span<double> u) {
    std::fill(u.begin(), u.end(), 0.0);
    u[StateLayout::kH] = 1.0;
    u[StateLayout::kHu] = u_of(y);
    u[StateLayout::kHv] = p.mean;
    u[StateLayout::kHb] = b0;
    for (int l = 1; l <= order; ++l) u[StateLayout::beta(l)] = p.moments[l - 1];
  };
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create directory " + p.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& p, std::vector<fs::path>* files) {
  ensure_dir(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  if (files) files->push_back(p);
  return os;
}

fs::path case_dir(const fs::path& root, const ExperimentSpec& s) {
  return root / ("ex" + std::to_string(s.id)) / s.profile_case;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_moment_profile(std::ostream& os, const Solution1D& sol, double y0, int n_zeta) {
  Grid2D g2;
  g2.y_min = sol.grid.y_min;
  g2.y_max = sol.grid.y_max;
  g2.n_y = sol.grid.n_cells;
  g2.n_zeta = n_zeta;
  const int j = slice_column(g2, y0);
  const auto c = sol.cell(j);
  const int order = (sol.width - 5) / 4;
  const double h = c[0];
  std::array<std::vector<double>, 4> mom;
  for (auto& m : mom) m.resize(order);
  for (int l = 1; l <= order; ++l) {
    mom[0][l - 1] = c[StateLayout::alpha(l)] / h;
    mom[1][l - 1] = c[StateLayout::beta(l)] / h;
    mom[2][l - 1] = c[StateLayout::gamma(l)] / h;
    mom[3][l - 1] = c[StateLayout::eta(l)] / h;
  }
  for (int k = 0; k < n_zeta; ++k) {
    const double z = g2.zeta_center(k);
    os << format_double(sol.time) << ',' << format_double(z) << ',' << format_double(h);
    for (int q = 0; q < 4; ++q) os << ',' << format_double(eval_profile(c[1 + q] / h, mom[q], z));
    os << '\n';
  }
}

void write_reference_profile(std::ostream& os, const RefState2D& s, double y0) {
  const ProfileSlice p = profile_slice(s, y0);
  for (std::size_t k = 0; k < p.zeta.size(); ++k) {
    os << format_double(s.time) << ',' << format_double(p.zeta[k]) << ',' << format_double(p.h[k]) << ','
       << format_double(p.u[k]) << ',' << format_double(p.v[k]) << ',' << format_double(p.a[k]) << ','
       << format_double(p.b[k]) << '\n';
  }
}

constexpr const char* kProfileHeader = "t,zeta,h,u,v,a,b\n";

}  // namespace

ExperimentSpec make_experiment(int id, const std::string& profile_case) {
  ExperimentSpec s;
  s.id = id;
  s.profile_case = profile_case;
  const int k = case_index(profile_case);
  switch (id) {
    case 1:
    case 2:
      if (k < 0) {
        throw ConfigError("example " + std::to_string(id) + " has no case '" + profile_case +
                          "' (expected constant, linear, quadratic or cubic)");
      }
      bump_setup(s, k, id == 2);
      break;
    case 3:
    case 4:
      if (profile_case != "sinusoid") {
        throw ConfigError("example " + std::to_string(id) + " has no case '" + profile_case +
                          "' (expected sinusoid)");
      }
      adjustment_setup(s, id == 4);
      break;
    default:
      throw ConfigError("unknown example " + std::to_string(id) + " (expected 1, 2, 3 or 4)");
  }
  return s;
}

void validate(const ExperimentSpec& s) {
  if (!(s.cfl > 0.0 && s.cfl <= 0.5)) {
    throw ConfigError("cfl = " + format_double(s.cfl) + " outside (0, 0.5] (CFL stability bound)");
  }
  if (!(s.theta >= 1.0 && s.theta <= 2.0)) throw ConfigError("theta = " + format_double(s.theta) + " outside [1, 2]");
  if (!(s.g > 0.0)) throw ConfigError("g must be positive");
  if (!(s.dt_max > 0.0)) throw ConfigError("dt_max must be positive");
  if (!(s.tol_im >= 0.0)) throw ConfigError("tol_im must be nonnegative");
  if (s.n_y < 4) throw ConfigError("n_y must be at least 4");
  if (s.n_zeta < 4) throw ConfigError("n_zeta must be at least 4");
  if (!(s.y_max > s.y_min)) throw ConfigError("y_max must exceed y_min");
  if (s.snapshot_times.empty()) throw ConfigError("snapshot_times must not be empty");
  for (std::size_t i = 0; i < s.snapshot_times.size(); ++i) {
    if (!(s.snapshot_times[i] > 0.0) || (i > 0 && !(s.snapshot_times[i] > s.snapshot_times[i - 1]))) {
      throw ConfigError("snapshot_times must be positive and strictly increasing");
    }
  }
}

Grid1D moment_grid(const ExperimentSpec& s) { return Grid1D{s.y_min, s.y_max, s.n_y, s.boundary}; }

Grid2D reference_grid(const ExperimentSpec& s) {
  Grid2D g;
  g.y_min = s.y_min;
  g.y_max = s.y_max;
  g.n_y = s.n_y;
  g.n_zeta = s.n_zeta;
  g.boundary = s.boundary;
  return g;
}

ModelParams model_params(const ExperimentSpec& s, int order) {
  ModelParams p;
  p.g = s.g;
  p.coriolis = s.coriolis;
  p.bathymetry = s.bathymetry;
  p.bathymetry_slope = s.bathymetry_slope;
  p.order = order;
  p.tol_im = s.tol_im;
  return p;
}

Fv1dOptions fv1d_options(const ExperimentSpec& s) {
  Fv1dOptions o;
  o.theta = s.theta;
  o.cfl = s.cfl;
  o.dt_max = s.dt_max;
  return o;
}

RefOptions ref_options(const ExperimentSpec& s) {
  RefOptions o;
  o.g = s.g;
  o.coriolis = s.coriolis;
  o.bathymetry_slope = s.bathymetry_slope;
  o.theta = s.theta;
  o.cfl = s.cfl;
  o.dt_max = s.dt_max;
  return o;
}

Solution1D initial_moment(const ExperimentSpec& s, int order) {
  if (order < 0 || order > kMaxOrder) {
    throw ConfigError("order " + std::to_string(order) + " outside [0, " + std::to_string(kMaxOrder) + "]");
  }
  const Grid1D g = moment_grid(s);
  Solution1D sol(g, order);
  for (int j = 0; j < g.n_cells; ++j) s.moment_initial(g.center(j), order, sol.cell(j));
  return sol;
}

RefState2D initial_reference(const ExperimentSpec& s) {
  const Grid2D g = reference_grid(s);
  RefState2D st(g);
  for (int j = 0; j < g.n_y; ++j) {
    for (int k = 0; k < g.n_zeta; ++k) {
      const auto p = s.reference_initial(g.y_center(j), g.zeta_center(k));
      auto c = st.cell(j, k);
      c[0] = p[0];
      for (int q = 1; q < 5; ++q) c[q] = p[0] * p[q];
    }
  }
  RefSolver(ref_options(s), g).init_divergence_field(st);
  return st;
}

ExampleSetup build_example(int id, const std::string& profile_case, int order) {
  ExampleSetup e{make_experiment(id, profile_case), {}, {}};
  e.moment = initial_moment(e.spec, order);
  e.reference = initial_reference(e.spec);
  return e;
}

double l1_error(std::span<const double> a, std::span<const double> b, double dy) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("l1_error: grid mismatch (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + " cells)");
  }
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::abs(a[j] - b[j]);
  return s * dy;
}

DepthAverage moment_means(const Solution1D& sol) {
  DepthAverage d;
  const int n = sol.grid.n_cells;
  for (auto* v : {&d.y, &d.h, &d.u_m, &d.v_m, &d.a_m, &d.b_m}) v->resize(n);
  for (int j = 0; j < n; ++j) {
    const auto c = sol.cell(j);
    d.y[j] = sol.grid.center(j);
    d.h[j] = c[0];
    d.u_m[j] = c[1] / c[0];
    d.v_m[j] = c[2] / c[0];
    d.a_m[j] = c[3] / c[0];
    d.b_m[j] = c[4] / c[0];
  }
  return d;
}

MomentRun run_moment(const ExperimentSpec& spec, int order, const fs::path& out_root,
                     std::vector<fs::path>* files) {
  validate(spec);
  const auto t0 = std::chrono::steady_clock::now();
  const MomentModel model(model_params(spec, order));
  Fv1dSolver solver(model, moment_grid(spec), fv1d_options(spec));
  MomentRun run{initial_moment(spec, order), {}};
  run.summary.label = spec.label() + "/M" + std::to_string(order);

  const fs::path dir = out_root.empty() ? fs::path() : case_dir(out_root, spec) / ("M" + std::to_string(order));
  std::vector<std::ofstream> profiles;
  if (!dir.empty()) {
    for (double y0 : spec.profile_y) {
      profiles.push_back(open_out(dir / ("profiles_y" + format_label(y0) + ".csv"), files));
      profiles.back() << kProfileHeader;
    }
  }
  try {
    for (double t : spec.snapshot_times) {
      solver.advance(run.solution, t);
      spdlog::info("{}: t = {} after {} steps", run.summary.label, t, solver.stats().steps);
      if (dir.empty()) continue;
      auto os = open_out(dir / ("snapshot_t" + format_label(t) + ".csv"), files);
      write_snapshot_csv(os, run.solution);
      for (std::size_t i = 0; i < profiles.size(); ++i) {
        write_moment_profile(profiles[i], run.solution, spec.profile_y[i], spec.n_zeta);
      }
    }
  } catch (const HyperbolicityError& e) {
    throw HyperbolicityError(run.summary.label + ": " + e.what(), e.ratio());
  } catch (const SolverError& e) {
    throw SolverError(run.summary.label + ": " + e.what());
  }
  run.summary.steps = solver.stats().steps;
  run.summary.clipped_slopes = solver.stats().clipped_slopes;
  run.summary.max_im_ratio = solver.stats().max_im_ratio;
  run.summary.wall_seconds = elapsed(t0);
  return run;
}

ReferenceRun run_reference(const ExperimentSpec& spec, const fs::path& out_root, std::vector<fs::path>* files) {
  validate(spec);
  const auto t0 = std::chrono::steady_clock::now();
  RefSolver solver(ref_options(spec), reference_grid(spec));
  ReferenceRun run{initial_reference(spec), {}};
  run.summary.label = spec.label() + "/reference";

  const fs::path dir = out_root.empty() ? fs::path() : case_dir(out_root, spec) / "reference";
  std::vector<std::ofstream> profiles;
  if (!dir.empty()) {
    for (double y0 : spec.profile_y) {
      profiles.push_back(open_out(dir / ("profiles_y" + format_label(y0) + ".csv"), files));
      profiles.back() << kProfileHeader;
    }
  }
  try {
    for (double t : spec.snapshot_times) {
      solver.advance(run.state, t);
      spdlog::info("{}: t = {} after {} steps", run.summary.label, t, solver.stats().steps);
      if (dir.empty()) continue;
      {
        auto os = open_out(dir / ("snapshot_t" + format_label(t) + ".csv"), files);
        write_reference_csv(os, run.state);
      }
      {
        auto os = open_out(dir / ("depth_average_t" + format_label(t) + ".csv"), files);
        write_depth_average_csv(os, depth_average(run.state));
      }
      for (std::size_t i = 0; i < profiles.size(); ++i) {
        write_reference_profile(profiles[i], run.state, spec.profile_y[i]);
      }
    }
  } catch (const SolverError& e) {
    throw SolverError(run.summary.label + ": " + e.what());
  }
  run.summary.steps = solver.stats().steps;
  run.summary.clipped_slopes = solver.stats().clipped_slopes;
  run.summary.max_div_ratio = solver.stats().max_div_ratio;
  run.summary.wall_seconds = elapsed(t0);
  return run;
}

double ErrorReport::at(int order, const std::string& var) const {
  for (const auto& r : rows) {
    if (r.order == order && r.var == var) return r.l1;
  }
  throw std::out_of_range("no error entry for M=" + std::to_string(order) + " " + var);
}

ErrorReport compare_means(const DepthAverage& ref, const Solution1D& sol, double dy) {
  const DepthAverage m = moment_means(sol);
  const int order = (sol.width - 5) / 4;
  ErrorReport r;
  r.rows.push_back({order, "h", l1_error(m.h, ref.h, dy)});
  r.rows.push_back({order, "u_m", l1_error(m.u_m, ref.u_m, dy)});
  r.rows.push_back({order, "v_m", l1_error(m.v_m, ref.v_m, dy)});
  r.rows.push_back({order, "a_m", l1_error(m.a_m, ref.a_m, dy)});
  r.rows.push_back({order, "b_m", l1_error(m.b_m, ref.b_m, dy)});
  return r;
}

Comparison run_comparison(const ExperimentSpec& spec, const std::vector<int>& orders, const fs::path& out_root) {
  validate(spec);
  Comparison c;
  std::vector<fs::path>* files = out_root.empty() ? nullptr : &c.files;
  const ReferenceRun ref = run_reference(spec, out_root, files);
  c.runs.push_back(ref.summary);
  const DepthAverage avg = depth_average(ref.state);
  const double dy = moment_grid(spec).dy();
  for (int m : orders) {
    const MomentRun run = run_moment(spec, m, out_root, files);
    c.runs.push_back(run.summary);
    const ErrorReport e = compare_means(avg, run.solution, dy);
    c.errors.rows.insert(c.errors.rows.end(), e.rows.begin(), e.rows.end());
  }
  std::stable_sort(c.errors.rows.begin(), c.errors.rows.end(),
                   [](const ErrorRow& a, const ErrorRow& b) { return a.var < b.var; });
  if (!out_root.empty()) {
    auto os = open_out(case_dir(out_root, spec) / "errors.csv", files);
    write_errors_csv(os, c.errors);
  }
  return c;
}

void write_errors_csv(std::ostream& os, const ErrorReport& r) {
  os << "M,var,l1\n";
  for (const auto& row : r.rows) os << row.order << ',' << row.var << ',' << format_double(row.l1) << '\n';
}

std::string format_label(double x) {
  char buf[32];
  // start with enough digits for the integer part so %g never switches to exponent form
  const int first = std::abs(x) >= 1.0 ? static_cast<int>(std::floor(std::log10(std::abs(x)))) + 1 : 1;
  for (int p = std::min(first, 17); p <= 17; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

double relative_b_perturbation(const RefState2D& s, double y0) {
  const ProfileSlice p = profile_slice(s, y0);
  double hs = 0.0, hbs = 0.0;
  for (std::size_t k = 0; k < p.h.size(); ++k) {
    hs += p.h[k];
    hbs += p.h[k] * p.b[k];
  }
  const double bm = hbs / hs;
  double m = 0.0;
  for (double b : p.b) m = std::max(m, std::abs(b - bm));
  return m / std::abs(bm);
}

}  // namespace mrswme
