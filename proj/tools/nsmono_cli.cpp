// nsmono: run a scenario config and write its reports.
//
//   nsmono run <config> [--out DIR] [--format csv|json] [--seed N] [--tol-scale X]
//
// Exit status: 0 all checks passed, 1 an enabled check failed, 2 bad config
// or usage. OMP_NUM_THREADS controls the thread count.

#include "nsmono/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Monotonicity-formula toolkit for stationary Navier-Stokes in R^5"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario config");
  std::string config;
  std::string out = ".";
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  double tol_scale = 1.0;
  run->add_option("config", config, "Scenario config (JSON)")->required();
  run->add_option("--out", out, "Output directory");
  run->add_option("--format", format, "Tabular report format")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--tol-scale", tol_scale, "Multiply every tolerance")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const nsmono::ScenarioConfig cfg = nsmono::load_scenario(config);
    nsmono::RunOptions opts;
    opts.seed = seed;
    opts.tol_scale = tol_scale;
    const nsmono::ReportBundle bundle = nsmono::run_scenario(cfg, opts);
    for (const auto& path : nsmono::emit_report(bundle, nsmono::parse_format(format), out))
      std::cout << path.string() << '\n';
    if (!bundle.failures.empty()) {
      std::cerr << "failed checks:\n";
      for (const auto& f : bundle.failures) std::cerr << "  " << f << '\n';
      return 1;
    }
    return 0;
  } catch (const nsmono::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const nsmono::PremiseViolated& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const nsmono::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
