#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mmsec/scenario.hpp"

namespace mmsec::cli {

enum class Mode { kAnalytical, kSimulation, kBoth };

Mode parse_mode(const std::string& s);
std::string mode_name(Mode m);

struct SweepSpec {
  Axis axis = Axis::kEveIntensity;
  std::vector<double> grid;
  std::vector<Metric> metrics;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  Mode mode = Mode::kBoth;
  /// Absolute tolerance for probabilities, relative for densities. Bounds
  /// get twice this as their allowed gap.
  double tolerance = 0.01;
  unsigned threads = 0;
};

/// Throws ValidationError: empty or non-monotone grid, no metrics, fewer
/// than 1000 trials with simulation enabled.
void validate(const SweepSpec& s);

/// "a:b:n" for n linearly spaced points, "a:b:n:log" for log spacing, or a
/// comma-separated list.
std::vector<double> parse_grid(const std::string& text);
std::vector<Metric> parse_metrics(const std::string& text);

enum class Relation { kEstimate, kUpperBound, kLowerBound };
/// How the analytical value of a metric relates to the true one.
Relation relation(Metric m);

struct Row {
  std::string axis_name;
  double axis_value = 0.0;
  Metric metric = Metric::kTauN;
  std::optional<double> analytical;
  std::optional<double> empirical;
  std::optional<double> ci95;
  std::optional<double> sigma;
  std::optional<double> abs_diff;
  /// pass, fail, analytical or simulated.
  std::string status;
};

/// Analytical value of a metric; nullopt when there is none (microwave).
std::optional<double> analytical_value(const ScenarioParams& p, Metric m);

/// Rows in grid order, metric order within a point. `sink` sees each row as
/// it is finished. The microwave baseline needs `microwave` and a lambda_E
/// axis.
std::vector<Row> run_sweep(const ScenarioParams& p, const SweepSpec& s,
                           const std::optional<MicrowaveParams>& microwave = std::nullopt,
                           const std::function<void(const Row&)>& sink = {});

std::string csv_header();
std::string csv_row(const Row& r);
void write_csv(const std::string& path, const std::vector<Row>& rows);

struct FigureReport {
  std::vector<std::string> files;
  std::vector<std::string> summary;
  bool all_pass = true;
};

/// Runs every curve of a figure preset, writes one CSV per curve and a
/// summary.txt into out_dir.
FigureReport reproduce_figure(const std::string& name, std::uint64_t trials, std::uint64_t seed,
                              const std::string& out_dir, Mode mode = Mode::kBoth,
                              double tolerance = 0.01, unsigned threads = 0);

/// Index of the largest value; nullopt on empty input.
std::optional<std::size_t> argmax(const std::vector<double>& v);

}  // namespace mmsec::cli
