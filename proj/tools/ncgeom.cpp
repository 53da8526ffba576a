// Command-line front end: parse arguments, load and validate the config,
// dispatch, and serialize the report.  Exit codes: 0 success, 1 computation
// failure, 2 configuration or usage failure.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ncgeom/cli_io.hpp"

namespace {

// fallback config for commands that can run without one
ncgeom::RunConfig default_config() {
  ncgeom::RunConfig cfg;
  cfg.n = 2;
  cfg.sizes = {8, 8};
  cfg.lengths = {1.0, 1.0};
  cfg.n_clifford = 2;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matrix-geometry spectral toolkit"};
  app.require_subcommand(1);

  std::string config_path, format = "json", out_path;
  bool refine = false, nc = false, no_cache = false;
  int dim = 0, directions = 0, max_iters = 0;
  double penalty_mu = -1.0;

  const std::vector<std::string> names = {"clifford", "riemann",  "spectrum", "invariants",
                                          "finsler",  "extremize", "selfcheck"};
  for (const std::string& name : names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "path to a JSON run configuration");
    sub->add_option("--format", format, "output format: json or csv");
    sub->add_option("--out", out_path, "write output to this file instead of stdout");
    sub->add_flag("--no-cache", no_cache, "bypass the result cache");
    if (name == "invariants") sub->add_flag("--refine", refine, "rerun at higher momentum order");
    if (name == "spectrum") sub->add_flag("--nc", nc, "dense lattice operator spectrum");
    if (name == "clifford") sub->add_option("--dim", dim, "number of generators");
    if (name == "finsler") sub->add_option("--directions", directions, "momentum sample size");
    if (name == "extremize") {
      sub->add_option("--max-iters", max_iters, "descent iteration cap");
      sub->add_option("--penalty-mu", penalty_mu, "self-adjointness penalty weight");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();

  try {
    ncgeom::RunConfig cfg;
    if (!config_path.empty()) {
      cfg = ncgeom::parse_config(config_path);
    } else if (command == "clifford" || command == "selfcheck") {
      cfg = default_config();
    } else {
      std::cerr << "error: --config is required for '" << command << "'\n";
      return 2;
    }

    // command-line overrides land in command_params so the cache key sees them
    if (dim > 0) cfg.command_params["dim"] = dim;
    if (directions > 0) cfg.command_params["directions"] = directions;
    if (max_iters > 0) cfg.command_params["max_iters"] = max_iters;
    if (penalty_mu >= 0.0) cfg.command_params["penalty_mu"] = penalty_mu;

    ncgeom::RunOptions opt;
    opt.refine = refine;
    opt.nc = nc;
    opt.no_cache = no_cache;

    const ncgeom::Report report = ncgeom::run_command(cfg, command, opt);
    const std::string text = ncgeom::emit(report, format);

    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
      if (!out) {
        std::cerr << "error: cannot write '" << out_path << "'\n";
        return 1;
      }
      out << text;
    }

    if (command == "selfcheck" && !report.payload.value("all_pass", false)) {
      std::cerr << "selfcheck: at least one check failed\n";
      return 1;
    }
    return 0;
  } catch (const ncgeom::SchemaError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ncgeom::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ncgeom::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
