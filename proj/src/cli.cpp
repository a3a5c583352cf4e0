#include "mrswme/cli.hpp"

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "mrswme/closure.hpp"
#include "mrswme/errors.hpp"
#include "mrswme/hyperbolicity.hpp"

namespace mrswme {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kKeys = {
    "mode",      "example",   "case",       "order",      "orders",     "n_y",       "n_zeta",
    "cfl",       "theta",     "g",          "dt_max",     "tol_im",     "final_time", "snapshot_times",
    "profile_y", "b_range",   "beta_range", "eta_range",  "resolution", "gh",        "format",
    "out"};

template <class T>
T get(const json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type (got " + doc.at(key).dump() + ")");
  }
}

// a scalar is accepted where a list is expected
template <class T>
std::vector<T> get_list(const json& doc, const std::string& key) {
  const json& v = doc.at(key);
  if (!v.is_array()) return {get<T>(doc, key)};
  return get<std::vector<T>>(doc, key);
}

std::array<double, 2> get_range(const json& doc, const std::string& key) {
  const auto v = get_list<double>(doc, key);
  if (v.size() != 2 || !(v[0] <= v[1])) throw ConfigError("config key '" + key + "' must be [lo, hi] with lo <= hi");
  return {v[0], v[1]};
}

void check_order(int m, const std::string& key) {
  if (m < 0 || m > kMaxOrder) {
    throw ConfigError("config key '" + key + "' = " + std::to_string(m) + " outside [0, " +
                      std::to_string(kMaxOrder) + "]");
  }
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out;
}

json summary_json(const RunSummary& s) {
  return {{"label", s.label},
          {"steps", s.steps},
          {"clipped_slopes", s.clipped_slopes},
          {"max_im_ratio", s.max_im_ratio},
          {"max_div_ratio", s.max_div_ratio},
          {"wall_seconds", s.wall_seconds}};
}

fs::path case_root(const RunConfig& c) {
  return c.out / ("ex" + std::to_string(c.example)) / c.profile_case;
}

void write_manifest(const fs::path& path, const RunConfig& c, const std::vector<RunSummary>& runs,
                    const std::vector<fs::path>& files, double wall, const fs::path& base) {
  json m;
  m["mode"] = to_string(c.mode);
  m["code_version"] = kCodeVersion;
  m["config"] = to_json(c);
  m["wall_seconds"] = wall;
  double im = 0.0;
  long steps = 0;
  json jr = json::array();
  for (const auto& r : runs) {
    jr.push_back(summary_json(r));
    im = std::max(im, r.max_im_ratio);
    steps += r.steps;
  }
  m["runs"] = jr;
  m["total_steps"] = steps;
  m["max_im_ratio"] = im;
  json jf = json::array();
  for (const auto& f : files) jf.push_back({{"path", fs::relative(f, base).generic_string()}, {"sha256", sha256_file(f)}});
  m["files"] = jf;
  fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << m.dump(2) << '\n';
}

}  // namespace

Mode parse_mode(const std::string& name) {
  if (name == "run-moment") return Mode::run_moment;
  if (name == "run-reference") return Mode::run_reference;
  if (name == "compare") return Mode::compare;
  if (name == "hyperbolicity-scan") return Mode::hyperbolicity_scan;
  if (name == "tensors") return Mode::tensors;
  throw ConfigError("unknown mode '" + name +
                    "' (expected run-moment, run-reference, compare, hyperbolicity-scan or tensors)");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::run_moment: return "run-moment";
    case Mode::run_reference: return "run-reference";
    case Mode::compare: return "compare";
    case Mode::hyperbolicity_scan: return "hyperbolicity-scan";
    case Mode::tensors: return "tensors";
  }
  return "";
}

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!kKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  RunConfig c;
  if (doc.contains("mode")) c.mode = parse_mode(get<std::string>(doc, "mode"));
  if (doc.contains("example")) c.example = get<int>(doc, "example");
  if (doc.contains("case")) c.profile_case = get<std::string>(doc, "case");
  else if (c.example >= 3) c.profile_case = "sinusoid";
  if (doc.contains("order")) c.order = get<int>(doc, "order");
  check_order(c.order, "order");
  if (doc.contains("orders")) c.orders = get_list<int>(doc, "orders");
  if (c.orders.empty()) throw ConfigError("config key 'orders' must not be empty");
  for (int m : c.orders) check_order(m, "orders");

  if (doc.contains("n_y")) c.n_y = get<int>(doc, "n_y");
  if (doc.contains("n_zeta")) c.n_zeta = get<int>(doc, "n_zeta");
  if (doc.contains("cfl")) c.cfl = get<double>(doc, "cfl");
  if (doc.contains("theta")) c.theta = get<double>(doc, "theta");
  if (doc.contains("g")) c.g = get<double>(doc, "g");
  if (doc.contains("dt_max")) c.dt_max = get<double>(doc, "dt_max");
  if (doc.contains("tol_im")) c.tol_im = get<double>(doc, "tol_im");
  if (doc.contains("final_time")) c.final_time = get<double>(doc, "final_time");
  if (doc.contains("snapshot_times")) c.snapshot_times = get_list<double>(doc, "snapshot_times");
  if (doc.contains("profile_y")) c.profile_y = get_list<double>(doc, "profile_y");

  if (c.cfl && !(*c.cfl > 0.0 && *c.cfl <= 0.5)) {
    throw ConfigError("config key 'cfl' = " + format_double(*c.cfl) +
                      " outside (0, 0.5]; the CFL bound requires nu <= 0.5");
  }
  if (c.theta && !(*c.theta >= 1.0 && *c.theta <= 2.0)) {
    throw ConfigError("config key 'theta' = " + format_double(*c.theta) + " outside [1, 2]");
  }

  if (doc.contains("b_range")) c.b_range = get_range(doc, "b_range");
  if (doc.contains("beta_range")) c.beta_range = get_range(doc, "beta_range");
  if (doc.contains("eta_range")) c.eta_range = get_range(doc, "eta_range");
  if (doc.contains("resolution")) {
    const auto r = get_list<int>(doc, "resolution");
    if (r.size() == 1) c.resolution = {r[0], r[0], r[0]};
    else if (r.size() == 3) c.resolution = {r[0], r[1], r[2]};
    else throw ConfigError("config key 'resolution' must be n or [n_b, n_beta, n_eta]");
    for (int n : c.resolution) {
      if (n < 1) throw ConfigError("config key 'resolution' entries must be >= 1");
    }
  }
  if (doc.contains("gh")) c.gh = get<double>(doc, "gh");
  if (!(c.gh > 0.0)) throw ConfigError("config key 'gh' must be positive");
  if (doc.contains("format")) c.format = get<std::string>(doc, "format");
  if (c.format != "csv" && c.format != "json") throw ConfigError("config key 'format' must be csv or json");
  if (doc.contains("out")) c.out = get<std::string>(doc, "out");

  if (c.mode == Mode::run_moment || c.mode == Mode::run_reference || c.mode == Mode::compare) {
    experiment_spec(c);
  }
  return c;
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = text.find_first_not_of(" \t\r\n") == std::string::npos ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

void apply_override(json& doc, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + kv + "' is not key=value");
  const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
  json v = json::parse(value, nullptr, false);
  if (v.is_discarded()) v = json::parse("[" + value + "]", nullptr, false);
  if (v.is_discarded()) v = value;
  doc[key] = v;
}

ExperimentSpec experiment_spec(const RunConfig& c) {
  ExperimentSpec s = make_experiment(c.example, c.profile_case);
  if (c.n_y) s.n_y = *c.n_y;
  if (c.n_zeta) s.n_zeta = *c.n_zeta;
  if (c.cfl) s.cfl = *c.cfl;
  if (c.theta) s.theta = *c.theta;
  if (c.g) s.g = *c.g;
  if (c.dt_max) s.dt_max = *c.dt_max;
  if (c.tol_im) s.tol_im = *c.tol_im;
  if (c.snapshot_times) s.snapshot_times = *c.snapshot_times;
  if (c.final_time) {
    std::vector<double> t;
    for (double x : s.snapshot_times) {
      if (x < *c.final_time) t.push_back(x);
    }
    t.push_back(*c.final_time);
    s.snapshot_times = t;
  }
  if (c.profile_y) s.profile_y = *c.profile_y;
  validate(s);
  return s;
}

json to_json(const RunConfig& c) {
  json j;
  j["mode"] = to_string(c.mode);
  j["out"] = c.out.generic_string();
  switch (c.mode) {
    case Mode::tensors:
      j["order"] = c.order;
      j["format"] = c.format;
      return j;
    case Mode::hyperbolicity_scan:
      j["b_range"] = c.b_range;
      j["beta_range"] = c.beta_range;
      j["eta_range"] = c.eta_range;
      j["resolution"] = c.resolution;
      j["gh"] = c.gh;
      return j;
    default:
      break;
  }
  const ExperimentSpec s = experiment_spec(c);
  j["example"] = c.example;
  j["case"] = c.profile_case;
  if (c.mode == Mode::compare) j["orders"] = c.orders;
  if (c.mode == Mode::run_moment) j["order"] = c.order;
  j["n_y"] = s.n_y;
  j["n_zeta"] = s.n_zeta;
  j["cfl"] = s.cfl;
  j["theta"] = s.theta;
  j["g"] = s.g;
  j["dt_max"] = s.dt_max;
  j["tol_im"] = s.tol_im;
  j["snapshot_times"] = s.snapshot_times;
  j["profile_y"] = s.profile_y;
  return j;
}

std::string sha256_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + p.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (is.read(buf, sizeof buf) || is.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(is.gcount()));
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::vector<fs::path> write_tensors(int order, const std::string& format, const fs::path& dir) {
  check_order(order, "order");
  const ClosureTensors t = build_tensors(order);
  fs::create_directories(dir);
  std::vector<fs::path> files;
  auto open = [&](const std::string& name) {
    files.push_back(dir / name);
    std::ofstream os(files.back(), std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + files.back().string());
    return os;
  };
  if (format == "json") {
    json j;
    j["order"] = order;
    json a = json::array(), b = json::array(), g = json::array();
    for (int i = 1; i <= order; ++i) {
      json ai = json::array(), bi = json::array(), gi = json::array();
      for (int l = 1; l <= order; ++l) {
        json al = json::array(), bl = json::array();
        for (int n = 1; n <= order; ++n) {
          al.push_back(t.A(i, l, n));
          bl.push_back(t.B(i, l, n));
        }
        ai.push_back(al);
        bi.push_back(bl);
        gi.push_back(t.Gamma(i, l));
      }
      a.push_back(ai);
      b.push_back(bi);
      g.push_back(gi);
    }
    j["A"] = a;
    j["B"] = b;
    j["Gamma"] = g;
    j["phi_at_one"] = std::vector<double>(t.phi_at_one_data().begin(), t.phi_at_one_data().end());
    open("tensors.json") << j.dump(2) << '\n';
    return files;
  }
  {
    auto os = open("A.csv");
    os << "i,l,n,A\n";
    for (int i = 1; i <= order; ++i)
      for (int l = 1; l <= order; ++l)
        for (int n = 1; n <= order; ++n) os << i << ',' << l << ',' << n << ',' << format_double(t.A(i, l, n)) << '\n';
  }
  {
    auto os = open("B.csv");
    os << "i,l,n,B\n";
    for (int i = 1; i <= order; ++i)
      for (int l = 1; l <= order; ++l)
        for (int n = 1; n <= order; ++n) os << i << ',' << l << ',' << n << ',' << format_double(t.B(i, l, n)) << '\n';
  }
  {
    auto os = open("Gamma.csv");
    os << "i,l,Gamma\n";
    for (int i = 1; i <= order; ++i)
      for (int l = 1; l <= order; ++l) os << i << ',' << l << ',' << format_double(t.Gamma(i, l)) << '\n';
  }
  {
    auto os = open("phi_at_one.csv");
    os << "l,phi\n";
    for (int l = 1; l <= order; ++l) os << l << ',' << format_double(t.phi_at_one(l)) << '\n';
  }
  return files;
}

RunResult run(const RunConfig& c, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  std::vector<RunSummary> runs;
  fs::path base;
  auto wall = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
  try {
    switch (c.mode) {
      case Mode::tensors: {
        base = c.out / "tensors" / ("M" + std::to_string(c.order));
        res.files = write_tensors(c.order, c.format, base);
        break;
      }
      case Mode::hyperbolicity_scan: {
        base = c.out / "hyperbolicity";
        const ScanResult r = scan_region({c.b_range[0], c.b_range[1], c.resolution[0]},
                                         {c.beta_range[0], c.beta_range[1], c.resolution[1]},
                                         {c.eta_range[0], c.eta_range[1], c.resolution[2]}, c.gh);
        fs::create_directories(base);
        res.files.push_back(base / "scan.csv");
        std::ofstream os(res.files.back(), std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + res.files.back().string());
        write_scan_csv(os, r);
        spdlog::info("hyperbolicity scan: {} of {} samples non-hyperbolic", r.non_hyperbolic, r.samples.size());
        break;
      }
      case Mode::run_moment: {
        const ExperimentSpec s = experiment_spec(c);
        base = case_root(c) / ("M" + std::to_string(c.order));
        runs.push_back(run_moment(s, c.order, c.out, &res.files).summary);
        break;
      }
      case Mode::run_reference: {
        const ExperimentSpec s = experiment_spec(c);
        base = case_root(c) / "reference";
        runs.push_back(run_reference(s, c.out, &res.files).summary);
        break;
      }
      case Mode::compare: {
        const ExperimentSpec s = experiment_spec(c);
        base = case_root(c);
        Comparison cmp = run_comparison(s, c.orders, c.out);
        runs = cmp.runs;
        res.files = std::move(cmp.files);
        break;
      }
    }
    res.manifest = base / "manifest.json";
    write_manifest(res.manifest, c, runs, res.files, wall(), base);
    return res;
  } catch (const ConfigError& e) {
    res.exit_code = 2;
    err << "error code=2 kind=config message=\"" << one_line(e.what()) << "\"\n";
  } catch (const HyperbolicityError& e) {
    res.exit_code = 4;
    err << "error code=4 kind=hyperbolicity message=\"" << one_line(e.what()) << "\"\n";
  } catch (const SolverError& e) {
    res.exit_code = 3;
    err << "error code=3 kind=solver message=\"" << one_line(e.what()) << "\"\n";
  } catch (const std::exception& e) {
    res.exit_code = 1;
    err << "error code=1 kind=io message=\"" << one_line(e.what()) << "\"\n";
  }
  return res;
}

}  // namespace mrswme
