#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mmsec {

/// Invariant violation or malformed configuration.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double db_to_linear(double db);
double linear_to_db(double linear);

/// Thermal noise power in linear units for bandwidth `bw_hz` and noise figure
/// `nf_db`: -174 dBm/Hz + 10 log10(BW) + F.
double noise_power(double bw_hz, double nf_db);

enum class LinkState { kLos, kNlos };

struct BlockageModel {
  double los_fraction = 0.12;  // C
  double los_radius = 200.0;   // D, metres

  void validate() const;
};

struct PathLossModel {
  double alpha_los = 2.0;
  double alpha_nlos = 2.92;
  double beta_los_db = 61.4;
  double beta_nlos_db = 72.0;

  double c_los() const { return db_to_linear(-beta_los_db); }
  double c_nlos() const { return db_to_linear(-beta_nlos_db); }
  void validate() const;
};

/// Two-level sectored pattern. The main lobe covers |theta| <= beamwidth_deg,
/// so a uniformly oriented beam hits with probability beamwidth_deg / 180.
struct AntennaPattern {
  double main_gain = db_to_linear(15.0);
  double side_gain = db_to_linear(-3.0);
  double beamwidth_deg = 9.0;

  double main_probability() const { return beamwidth_deg / 180.0; }
  void validate() const;
};

/// Information sector of width beamwidth_deg carrying phi * P_t, artificial
/// noise elsewhere carrying (1 - phi) * P_t. Sidelobes are taken as zero.
struct AnPattern {
  double info_gain = db_to_linear(15.0);
  double an_gain = db_to_linear(3.0);
  double beamwidth_deg = 9.0;
  double power_split = 0.5;

  double info_probability() const { return beamwidth_deg / 180.0; }
  double an_probability() const { return 1.0 - info_probability(); }
  void validate() const;
};

struct FadingParams {
  int nakagami_los = 3;
  int nakagami_nlos = 2;

  void validate() const;
};

enum class EavesdropperMode { kNonColluding, kColluding };

/// Per-state link constants: intercept, exponent, Nakagami shape.
struct LinkModel {
  double intercept;
  double alpha;
  int shape;
};

struct ScenarioParams {
  double bs_intensity = 2e-4;   // points / m^2
  double eve_intensity = 1e-4;  // points / m^2
  double tx_power = 1000.0;     // linear
  double bandwidth_hz = 2e9;
  double noise_figure_db = 10.0;
  BlockageModel blockage;
  PathLossModel pathloss;
  FadingParams fading;
  std::variant<AntennaPattern, AnPattern> antenna = AntennaPattern{};
  double tc = 10.0;  // linear SINR thresholds
  double te = 1.0;
  EavesdropperMode eavesdropper_mode = EavesdropperMode::kNonColluding;

  double noise() const { return noise_power(bandwidth_hz, noise_figure_db); }
  LinkModel link(LinkState s) const;
  bool uses_an() const { return std::holds_alternative<AnPattern>(antenna); }
  /// Throws ValidationError when the antenna is of the other kind.
  const AntennaPattern& sectored() const;
  const AnPattern& an() const;
  AntennaPattern& sectored();
  AnPattern& an();

  void validate() const;
};

/// Legacy sub-6 GHz network used as the comparison baseline: single-slope
/// path loss, Rayleigh fading, no noise, M-antenna AN sectoring.
struct MicrowaveParams {
  double bs_intensity = 8e-4;
  double eve_intensity = 1e-4;
  double alpha = 2.7;
  int antennas = 6;
  double info_sector_deg = 60.0;
  double power_split = 0.5;
  double tc = 1.0;
  double te = 1e-3;

  /// Information-to-AN gain ratio, M - 1.
  double gain_ratio() const { return antennas - 1.0; }
  double info_probability() const { return info_sector_deg / 360.0; }
  void validate() const;
};

ScenarioParams load_scenario(const std::string& path);
/// Parses a scenario document; `source` names it in error messages.
ScenarioParams parse_scenario(const std::string& text, const std::string& source = "<string>");
std::string serialize_scenario(const ScenarioParams& p);

enum class Axis { kEveIntensity, kBsIntensity, kTcDb, kTeDb, kPowerSplit, kBeamwidth };

std::string axis_name(Axis a);
Axis parse_axis(const std::string& name);
/// Copy of `p` with the axis parameter set to `value` (dB for thresholds).
ScenarioParams with_axis(ScenarioParams p, Axis a, double value);

enum class Metric {
  kTauN,           // secure connectivity, non-colluding
  kTauC,           // secure connectivity, colluding, exact
  kTauCBound,      // secure connectivity, colluding, upper bound
  kPCon,           // connection probability, noise limited
  kPSecN,          // secrecy probability, non-colluding
  kPSecC,          // secrecy probability, colluding
  kNpN,            // perfect link density, non-colluding
  kNpC,            // perfect link density, colluding
  kAnPCon,         // AN connection probability
  kAnPSec,         // AN secrecy probability
  kAnNp,           // AN perfect link density
  kMicrowaveNp,    // microwave baseline perfect link density (simulation)
};

std::string metric_name(Metric m);
Metric parse_metric(const std::string& name);
/// Densities are reported per m^2; everything else is a probability.
bool metric_is_density(Metric m);

struct Curve {
  std::string label;
  ScenarioParams params;
  std::vector<Metric> metrics;
  std::optional<MicrowaveParams> microwave;
};

struct FigurePreset {
  std::string name;
  std::string title;
  Axis axis;
  std::vector<double> grid;
  std::vector<Curve> curves;
};

std::vector<std::string> preset_names();
/// Base parameter set of a figure (its first curve).
ScenarioParams preset(const std::string& name);
FigurePreset figure_preset(const std::string& name);
/// Chicago and Manhattan blockage fits.
BlockageModel city_blockage(const std::string& city);

}  // namespace mmsec
