#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mrswme/cli.hpp"
#include "mrswme/errors.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  std::vector<std::string> pairs;
  std::optional<int> order;
  std::string format;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "JSON configuration file");
  sub->add_option("--out", o.out, "output root directory");
  sub->add_option("--override", o.overrides, "key=value, repeatable");
  sub->add_option("pairs", o.pairs, "key=value pairs, same as --override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Magnetic rotating shallow water moment equations: solvers and diagnostics"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  Options o;
  const std::pair<const char*, const char*> modes[] = {
      {"run-moment", "run one moment model of order M"},
      {"run-reference", "run the vertically resolved reference solver"},
      {"compare", "reference run plus moment runs, L1 errors of the depth averages"},
      {"hyperbolicity-scan", "realness of the first-order quartic over a (b_m, beta, eta) box"},
      {"tensors", "closure tensors A, B, Gamma of one order"}};
  for (const auto& [name, help] : modes) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, o);
    if (std::string(name) == "tensors" || std::string(name) == "run-moment") {
      sub->add_option("--order", o.order, "moment order");
    }
    if (std::string(name) == "tensors") sub->add_option("--format", o.format, "csv or json");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    nlohmann::json doc = nlohmann::json::object();
    if (!o.config.empty()) {
      std::ifstream is(o.config);
      if (!is) throw mrswme::ConfigError("cannot read config file " + o.config);
      std::stringstream ss;
      ss << is.rdbuf();
      doc = nlohmann::json::parse(ss.str(), nullptr, false);
      if (doc.is_discarded()) throw mrswme::ConfigError("config file " + o.config + " is not valid JSON");
    }
    doc["mode"] = app.get_subcommands().front()->get_name();
    for (const auto& kv : o.pairs) mrswme::apply_override(doc, kv);
    for (const auto& kv : o.overrides) mrswme::apply_override(doc, kv);
    if (!o.out.empty()) doc["out"] = o.out;
    if (o.order) doc["order"] = *o.order;
    if (!o.format.empty()) doc["format"] = o.format;

    const mrswme::RunConfig cfg = mrswme::parse_config(doc);
    const mrswme::RunResult r = mrswme::run(cfg, std::cerr);
    if (r.exit_code == 0) std::cout << r.manifest.string() << '\n';
    return r.exit_code;
  } catch (const mrswme::ConfigError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '"', '\'');
    std::cerr << "error code=2 kind=config message=\"" << msg << "\"\n";
    return 2;
  }
}
