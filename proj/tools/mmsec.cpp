// mmsec: sweeps, figure reproduction and one-off evaluation from the shell.
//
// Exit codes: 0 all checks pass, 1 tolerance/bound failures, 2 usage or
// configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "mmsec/cli.hpp"
#include "mmsec/scenario.hpp"

namespace {

using namespace mmsec;

ScenarioParams load(const std::string& scenario, const std::string& preset_name) {
  if (!scenario.empty() && !preset_name.empty())
    throw ValidationError("use either --scenario or --preset, not both");
  if (!scenario.empty()) return load_scenario(scenario);
  if (!preset_name.empty()) return preset(preset_name);
  throw ValidationError("one of --scenario or --preset is required");
}

int run(int argc, char** argv) {
  CLI::App app{"mmWave secrecy lab: analytical vs Monte Carlo"};
  app.require_subcommand(1);

  std::string scenario, preset_name, axis = "lambda_e", grid, metrics = "tau_n", mode = "both";
  std::string out_dir = "out", figure;
  std::uint64_t trials = 100000, seed = 1;
  double tolerance = 0.01;

  auto* sweep = app.add_subcommand("sweep", "sweep one parameter and compare analysis with simulation");
  sweep->add_option("--scenario", scenario, "scenario JSON file");
  sweep->add_option("--preset", preset_name, "built-in base scenario (fig1..fig9)");
  sweep->add_option("--axis", axis, "lambda_e, lambda_b, tc_db, te_db, phi or theta_b")->capture_default_str();
  sweep->add_option("--grid", grid, "lo:hi:n[:log] or comma list")->required();
  sweep->add_option("--metrics", metrics, "comma list of metrics")->capture_default_str();
  sweep->add_option("--trials", trials)->capture_default_str();
  sweep->add_option("--seed", seed)->capture_default_str();
  sweep->add_option("--mode", mode, "analytical, simulation or both")->capture_default_str();
  sweep->add_option("--tolerance", tolerance)->capture_default_str();
  sweep->add_option("--out-dir", out_dir)->capture_default_str();

  auto* repro = app.add_subcommand("reproduce", "run every curve of a figure preset");
  repro->add_option("figure", figure, "fig1..fig9")->required();
  repro->add_option("--trials", trials)->capture_default_str();
  repro->add_option("--seed", seed)->capture_default_str();
  repro->add_option("--mode", mode)->capture_default_str();
  repro->add_option("--tolerance", tolerance)->capture_default_str();
  repro->add_option("--out-dir", out_dir)->capture_default_str();

  auto* eval = app.add_subcommand("eval", "print analytical metrics for one scenario");
  eval->add_option("--scenario", scenario);
  eval->add_option("--preset", preset_name);
  eval->add_option("--metrics", metrics)->capture_default_str();

  auto* show = app.add_subcommand("show", "print a scenario (preset or file) as JSON");
  show->add_option("--scenario", scenario);
  show->add_option("--preset", preset_name);

  app.add_subcommand("presets", "list figure presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*sweep) {
      const ScenarioParams p = load(scenario, preset_name);
      cli::SweepSpec s;
      s.axis = parse_axis(axis);
      s.grid = cli::parse_grid(grid);
      s.metrics = cli::parse_metrics(metrics);
      s.trials = trials;
      s.seed = seed;
      s.mode = cli::parse_mode(mode);
      s.tolerance = tolerance;
      cli::validate(s);
      std::filesystem::create_directories(out_dir);
      const std::string path = (std::filesystem::path(out_dir) / "sweep.csv").string();
      std::ofstream f(path, std::ios::binary);
      if (!f) throw ValidationError("cannot write " + path);
      f << cli::csv_header() << "\n";
      bool failed = false;
      std::cout << cli::csv_header() << "\n";
      // rows are flushed one by one so a failure keeps what was computed
      cli::run_sweep(p, s, std::nullopt, [&](const cli::Row& r) {
        f << cli::csv_row(r) << "\n" << std::flush;
        std::cout << cli::csv_row(r) << "\n";
        failed |= r.status == "fail";
      });
      return failed ? 1 : 0;
    }
    if (*repro) {
      const auto rep = cli::reproduce_figure(figure, trials, seed,
                                             (std::filesystem::path(out_dir) / figure).string(),
                                             cli::parse_mode(mode), tolerance);
      for (const auto& l : rep.summary) std::cout << l << "\n";
      for (const auto& fpath : rep.files) std::cout << "wrote " << fpath << "\n";
      return rep.all_pass ? 0 : 1;
    }
    if (*eval) {
      const ScenarioParams p = load(scenario, preset_name);
      for (Metric m : cli::parse_metrics(metrics)) {
        const auto v = cli::analytical_value(p, m);
        if (v) std::printf("%-13s %.9g\n", metric_name(m).c_str(), *v);
        else std::printf("%-13s (simulation only)\n", metric_name(m).c_str());
      }
      return 0;
    }
    if (*show) {
      std::cout << serialize_scenario(load(scenario, preset_name)) << "\n";
      return 0;
    }
    for (const auto& n : preset_names()) std::cout << n << "  " << figure_preset(n).title << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
