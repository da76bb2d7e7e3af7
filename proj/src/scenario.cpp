#include "mmsec/scenario.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace mmsec {

using nlohmann::json;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

double noise_power(double bw_hz, double nf_db) {
  if (!(bw_hz > 0.0)) throw ValidationError("bandwidth must be positive");
  return db_to_linear(-174.0 + 10.0 * std::log10(bw_hz) + nf_db);
}

void BlockageModel::validate() const {
  if (!(los_fraction >= 0.0 && los_fraction <= 1.0)) {
    throw ValidationError("blockage.los_fraction must lie in [0, 1]");
  }
  if (!(los_radius > 0.0) || !std::isfinite(los_radius)) {
    throw ValidationError("blockage.los_radius must be positive and finite");
  }
}

void PathLossModel::validate() const {
  if (!(alpha_los > 0.0) || !(alpha_nlos > 0.0)) {
    throw ValidationError("pathloss exponents must be positive");
  }
  if (!(alpha_los < alpha_nlos)) {
    throw ValidationError("pathloss.alpha_los must be smaller than alpha_nlos");
  }
  // C_L > C_N means a smaller LOS intercept loss.
  if (!(beta_los_db < beta_nlos_db)) {
    throw ValidationError("pathloss.beta_los_db must be smaller than beta_nlos_db");
  }
  // The NLOS-exterior interference integral needs alpha > 2.
  if (!(alpha_nlos > 2.0)) throw ValidationError("pathloss.alpha_nlos must exceed 2");
}

void AntennaPattern::validate() const {
  if (!(side_gain > 0.0) || !(main_gain > side_gain)) {
    throw ValidationError("antenna gains must satisfy main > side > 0");
  }
  if (!(beamwidth_deg > 0.0 && beamwidth_deg < 180.0)) {
    throw ValidationError("antenna.beamwidth_deg must lie in (0, 180)");
  }
}

void AnPattern::validate() const {
  if (!(info_gain > 0.0) || !(an_gain > 0.0)) {
    throw ValidationError("antenna gains must be positive");
  }
  if (!(beamwidth_deg > 0.0 && beamwidth_deg <= 180.0)) {
    throw ValidationError("antenna.beamwidth_deg must lie in (0, 180]");
  }
  if (!(power_split >= 0.0 && power_split <= 1.0)) {
    throw ValidationError("antenna.power_split must lie in [0, 1]");
  }
}

void FadingParams::validate() const {
  if (nakagami_los < 1 || nakagami_nlos < 1) {
    throw ValidationError("Nakagami shapes must be integers >= 1");
  }
}

LinkModel ScenarioParams::link(LinkState s) const {
  if (s == LinkState::kLos) return {pathloss.c_los(), pathloss.alpha_los, fading.nakagami_los};
  return {pathloss.c_nlos(), pathloss.alpha_nlos, fading.nakagami_nlos};
}

const AntennaPattern& ScenarioParams::sectored() const {
  if (const auto* a = std::get_if<AntennaPattern>(&antenna)) return *a;
  throw ValidationError("scenario uses an AN antenna, sectored pattern required");
}
const AnPattern& ScenarioParams::an() const {
  if (const auto* a = std::get_if<AnPattern>(&antenna)) return *a;
  throw ValidationError("scenario uses a sectored antenna, AN pattern required");
}
AntennaPattern& ScenarioParams::sectored() {
  return const_cast<AntennaPattern&>(std::as_const(*this).sectored());
}
AnPattern& ScenarioParams::an() { return const_cast<AnPattern&>(std::as_const(*this).an()); }

void ScenarioParams::validate() const {
  if (!(bs_intensity >= 0.0) || !std::isfinite(bs_intensity)) {
    throw ValidationError("bs_intensity must be a finite non-negative number");
  }
  if (!(eve_intensity >= 0.0) || !std::isfinite(eve_intensity)) {
    throw ValidationError("eve_intensity must be a finite non-negative number");
  }
  if (!(tx_power > 0.0) || !std::isfinite(tx_power)) throw ValidationError("tx power must be positive");
  if (!(bandwidth_hz > 0.0)) throw ValidationError("bandwidth_hz must be positive");
  if (!std::isfinite(noise_figure_db)) throw ValidationError("noise_figure_db must be finite");
  if (!(tc >= 0.0) || !(te >= 0.0)) throw ValidationError("thresholds must be non-negative");
  blockage.validate();
  pathloss.validate();
  fading.validate();
  std::visit([](const auto& a) { a.validate(); }, antenna);
}

void MicrowaveParams::validate() const {
  if (!(bs_intensity >= 0.0) || !(eve_intensity >= 0.0)) {
    throw ValidationError("microwave intensities must be non-negative");
  }
  if (!(alpha > 2.0)) throw ValidationError("microwave path-loss exponent must exceed 2");
  if (antennas < 2) throw ValidationError("microwave BS needs at least two antennas");
  if (!(info_sector_deg > 0.0 && info_sector_deg < 360.0)) {
    throw ValidationError("microwave info sector must lie in (0, 360)");
  }
  if (!(power_split >= 0.0 && power_split <= 1.0)) {
    throw ValidationError("microwave power_split must lie in [0, 1]");
  }
}

// ---------------------------------------------------------------------------
// Configuration files

namespace {

// Strict view over one JSON object: every key must be consumed exactly once.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(where("") + "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw ValidationError(where(key) + "expected a number");
    return v.get<double>();
  }

  std::optional<double> maybe_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  int integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer()) throw ValidationError(where(key) + "expected an integer");
    return v.get<int>();
  }

  std::string text(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw ValidationError(where(key) + "expected a string");
    return v.get<std::string>();
  }

  Section child(const std::string& key) { return Section(at(key), join(key)); }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ValidationError(where(key) + "unknown key");
    }
  }

  std::string where(const std::string& key) const {
    const std::string p = key.empty() ? path_ : join(key);
    return "field '" + (p.empty() ? std::string("<root>") : p) + "': ";
  }

 private:
  const json& at(const std::string& key) {
    if (!has(key)) throw ValidationError(where(key) + "missing required field");
    used_.insert(key);
    return j_.at(key);
  }
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// Exactly one of linear / dB / rate forms.
double read_threshold(Section& s, const std::string& linear, const std::string& db,
                      const std::string& rate) {
  const int forms = s.has(linear) + s.has(db) + s.has(rate);
  if (forms != 1) {
    throw ValidationError(s.where(linear) + "give exactly one of '" + linear + "', '" + db +
                          "', '" + rate + "'");
  }
  if (s.has(linear)) return s.number(linear);
  if (s.has(db)) return db_to_linear(s.number(db));
  return std::exp2(s.number(rate)) - 1.0;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

ScenarioParams parse_scenario(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    std::ostringstream msg;
    msg << source << ":" << line << ":" << col << ": syntax error: " << e.what();
    throw ValidationError(msg.str());
  }

  try {
    Section root(doc, "");
    ScenarioParams p;
    p.bs_intensity = root.number("bs_intensity");
    p.eve_intensity = root.number("eve_intensity");
    p.tx_power = db_to_linear(root.number("tx_power_db"));
    p.bandwidth_hz = root.number("bandwidth_hz");
    p.noise_figure_db = root.number("noise_figure_db");

    Section blk = root.child("blockage");
    p.blockage.los_fraction = blk.number("los_fraction");
    p.blockage.los_radius = blk.number("los_radius");
    blk.finish();

    Section pl = root.child("pathloss");
    p.pathloss.alpha_los = pl.number("alpha_los");
    p.pathloss.alpha_nlos = pl.number("alpha_nlos");
    p.pathloss.beta_los_db = pl.number("beta_los_db");
    p.pathloss.beta_nlos_db = pl.number("beta_nlos_db");
    pl.finish();

    Section fd = root.child("fading");
    p.fading.nakagami_los = fd.integer("nakagami_los");
    p.fading.nakagami_nlos = fd.integer("nakagami_nlos");
    fd.finish();

    Section ant = root.child("antenna");
    const std::string type = ant.text("type");
    if (type == "sectored") {
      AntennaPattern a;
      a.main_gain = db_to_linear(ant.number("main_gain_db"));
      a.side_gain = db_to_linear(ant.number("side_gain_db"));
      a.beamwidth_deg = ant.number("beamwidth_deg");
      p.antenna = a;
    } else if (type == "an") {
      AnPattern a;
      a.info_gain = db_to_linear(ant.number("info_gain_db"));
      a.an_gain = db_to_linear(ant.number("an_gain_db"));
      a.beamwidth_deg = ant.number("beamwidth_deg");
      a.power_split = ant.number("power_split");
      p.antenna = a;
    } else {
      throw ValidationError(ant.where("type") + "expected 'sectored' or 'an', got '" + type + "'");
    }
    ant.finish();

    Section th = root.child("thresholds");
    p.tc = read_threshold(th, "tc", "tc_db", "rc_bits");
    p.te = read_threshold(th, "te", "te_db", "re_bits");
    th.finish();

    const std::string mode = root.text("eavesdropper_mode");
    if (mode == "non_colluding") {
      p.eavesdropper_mode = EavesdropperMode::kNonColluding;
    } else if (mode == "colluding") {
      p.eavesdropper_mode = EavesdropperMode::kColluding;
    } else {
      throw ValidationError(root.where("eavesdropper_mode") +
                            "expected 'non_colluding' or 'colluding'");
    }
    root.finish();
    p.validate();
    return p;
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  }
}

ScenarioParams load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

std::string serialize_scenario(const ScenarioParams& p) {
  json doc;
  doc["bs_intensity"] = p.bs_intensity;
  doc["eve_intensity"] = p.eve_intensity;
  doc["tx_power_db"] = linear_to_db(p.tx_power);
  doc["bandwidth_hz"] = p.bandwidth_hz;
  doc["noise_figure_db"] = p.noise_figure_db;
  doc["blockage"] = {{"los_fraction", p.blockage.los_fraction},
                     {"los_radius", p.blockage.los_radius}};
  doc["pathloss"] = {{"alpha_los", p.pathloss.alpha_los},
                     {"alpha_nlos", p.pathloss.alpha_nlos},
                     {"beta_los_db", p.pathloss.beta_los_db},
                     {"beta_nlos_db", p.pathloss.beta_nlos_db}};
  doc["fading"] = {{"nakagami_los", p.fading.nakagami_los},
                   {"nakagami_nlos", p.fading.nakagami_nlos}};
  if (const auto* a = std::get_if<AntennaPattern>(&p.antenna)) {
    doc["antenna"] = {{"type", "sectored"},
                      {"main_gain_db", linear_to_db(a->main_gain)},
                      {"side_gain_db", linear_to_db(a->side_gain)},
                      {"beamwidth_deg", a->beamwidth_deg}};
  } else {
    const auto& b = std::get<AnPattern>(p.antenna);
    doc["antenna"] = {{"type", "an"},
                      {"info_gain_db", linear_to_db(b.info_gain)},
                      {"an_gain_db", linear_to_db(b.an_gain)},
                      {"beamwidth_deg", b.beamwidth_deg},
                      {"power_split", b.power_split}};
  }
  doc["thresholds"] = {{"tc", p.tc}, {"te", p.te}};
  doc["eavesdropper_mode"] =
      p.eavesdropper_mode == EavesdropperMode::kColluding ? "colluding" : "non_colluding";
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Axes and metrics

namespace {

struct AxisEntry {
  Axis axis;
  const char* name;
};
constexpr AxisEntry kAxes[] = {
    {Axis::kEveIntensity, "lambda_e"}, {Axis::kBsIntensity, "lambda_b"},
    {Axis::kTcDb, "tc_db"},            {Axis::kTeDb, "te_db"},
    {Axis::kPowerSplit, "phi"},        {Axis::kBeamwidth, "theta_b"},
};

struct MetricEntry {
  Metric metric;
  const char* name;
};
constexpr MetricEntry kMetrics[] = {
    {Metric::kTauN, "tau_n"},         {Metric::kTauC, "tau_c"},
    {Metric::kTauCBound, "tau_c_bound"}, {Metric::kPCon, "p_con"},
    {Metric::kPSecN, "p_sec_n"},      {Metric::kPSecC, "p_sec_c"},
    {Metric::kNpN, "n_p_n"},          {Metric::kNpC, "n_p_c"},
    {Metric::kAnPCon, "an_p_con"},    {Metric::kAnPSec, "an_p_sec"},
    {Metric::kAnNp, "an_n_p"},        {Metric::kMicrowaveNp, "microwave_n_p"},
};

}  // namespace

std::string axis_name(Axis a) {
  for (const auto& e : kAxes) {
    if (e.axis == a) return e.name;
  }
  return "?";
}

Axis parse_axis(const std::string& name) {
  for (const auto& e : kAxes) {
    if (name == e.name) return e.axis;
  }
  throw ValidationError("unknown axis '" + name + "'");
}

ScenarioParams with_axis(ScenarioParams p, Axis a, double value) {
  switch (a) {
    case Axis::kEveIntensity: p.eve_intensity = value; break;
    case Axis::kBsIntensity: p.bs_intensity = value; break;
    case Axis::kTcDb: p.tc = db_to_linear(value); break;
    case Axis::kTeDb: p.te = db_to_linear(value); break;
    case Axis::kPowerSplit: p.an().power_split = value; break;
    case Axis::kBeamwidth:
      std::visit([value](auto& ant) { ant.beamwidth_deg = value; }, p.antenna);
      break;
  }
  return p;
}

std::string metric_name(Metric m) {
  for (const auto& e : kMetrics) {
    if (e.metric == m) return e.name;
  }
  return "?";
}

Metric parse_metric(const std::string& name) {
  for (const auto& e : kMetrics) {
    if (name == e.name) return e.metric;
  }
  throw ValidationError("unknown metric '" + name + "'");
}

bool metric_is_density(Metric m) {
  return m == Metric::kNpN || m == Metric::kNpC || m == Metric::kAnNp || m == Metric::kMicrowaveNp;
}

// ---------------------------------------------------------------------------
// Figure presets

BlockageModel city_blockage(const std::string& city) {
  if (city == "chicago") return {0.081, 250.0};
  if (city == "manhattan") return {0.117, 200.0};
  throw ValidationError("unknown city '" + city + "'");
}

namespace {

ScenarioParams base_scenario() {
  ScenarioParams p;  // defaults carry the 28 GHz channel constants
  p.blockage = {0.12, 200.0};
  return p;
}

AnPattern an_pattern(double beam_deg, double info_db, double an_db, double phi) {
  AnPattern a;
  a.beamwidth_deg = beam_deg;
  a.info_gain = db_to_linear(info_db);
  a.an_gain = db_to_linear(an_db);
  a.power_split = phi;
  return a;
}

AntennaPattern sectored_pattern(double beam_deg, double main_db, double side_db) {
  AntennaPattern a;
  a.beamwidth_deg = beam_deg;
  a.main_gain = db_to_linear(main_db);
  a.side_gain = db_to_linear(side_db);
  return a;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  return v;
}

std::string sci(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

FigurePreset make_preset(const std::string& name) {
  FigurePreset f;
  f.name = name;
  const std::vector<double> bs_trio = {5e-4, 2e-4, 6e-5};

  if (name == "fig1") {
    f.title = "secure connectivity vs eavesdropper intensity, non-colluding";
    f.axis = Axis::kEveIntensity;
    f.grid = linspace(1e-5, 4e-4, 8);
    for (double lb : bs_trio) {
      ScenarioParams p = base_scenario();
      p.bs_intensity = lb;
      f.curves.push_back({"lambda_b=" + sci(lb), p, {Metric::kTauN}, std::nullopt});
    }
  } else if (name == "fig2") {
    f.title = "secure connectivity vs eavesdropper intensity, colluding";
    f.axis = Axis::kEveIntensity;
    f.grid = linspace(1e-5, 4e-4, 8);
    for (double lb : bs_trio) {
      ScenarioParams p = base_scenario();
      p.bs_intensity = lb;
      p.eavesdropper_mode = EavesdropperMode::kColluding;
      f.curves.push_back(
          {"lambda_b=" + sci(lb), p, {Metric::kTauCBound, Metric::kTauC}, std::nullopt});
    }
  } else if (name == "fig3") {
    f.title = "colluding secrecy probability vs T_e";
    f.axis = Axis::kTeDb;
    f.grid = linspace(10.0, 45.0, 8);
    for (double le : {1e-5, 5e-5}) {
      ScenarioParams p = base_scenario();
      p.bs_intensity = 5e-4;
      p.blockage = city_blockage("chicago");
      p.eve_intensity = le;
      p.eavesdropper_mode = EavesdropperMode::kColluding;
      f.curves.push_back({"lambda_e=" + sci(le), p, {Metric::kPSecC}, std::nullopt});
    }
  } else if (name == "fig4") {
    f.title = "AN connection probability vs T_c";
    f.axis = Axis::kTcDb;
    f.grid = linspace(-10.0, 20.0, 7);
    for (double lb : {1e-4, 1e-3}) {
      ScenarioParams p = base_scenario();
      p.bs_intensity = lb;
      p.antenna = an_pattern(9.0, 15.0, 3.0, 0.5);
      f.curves.push_back({"lambda_b=" + sci(lb), p, {Metric::kAnPCon}, std::nullopt});
    }
  } else if (name == "fig5") {
    f.title = "AN secrecy probability vs T_e";
    f.axis = Axis::kTeDb;
    f.grid = linspace(-10.0, 30.0, 9);
    for (double le : {1e-4, 1e-3}) {
      ScenarioParams p = base_scenario();
      p.bs_intensity = 5e-5;
      p.eve_intensity = le;
      p.antenna = an_pattern(9.0, 15.0, 3.0, 0.5);
      f.curves.push_back({"lambda_e=" + sci(le), p, {Metric::kAnPSec}, std::nullopt});
    }
  } else if (name == "fig6") {
    f.title = "noise-limited perfect link density vs eavesdropper intensity";
    f.axis = Axis::kEveIntensity;
    f.grid = linspace(5e-5, 4e-4, 8);
    struct Pat {
      const char* label;
      double beam, main_db, side_db;
    };
    for (Pat pat : {Pat{"9deg_15dB", 9.0, 15.0, -3.0}, Pat{"30deg_10dB", 30.0, 10.0, -3.0},
                    Pat{"60deg_5dB", 60.0, 5.0, -3.0}}) {
      ScenarioParams p = base_scenario();
      p.bs_intensity = 2e-4;
      p.tc = db_to_linear(10.0);
      p.te = db_to_linear(0.0);
      p.antenna = sectored_pattern(pat.beam, pat.main_db, pat.side_db);
      f.curves.push_back({pat.label,
                          p,
                          {Metric::kPCon, Metric::kPSecN, Metric::kNpN, Metric::kNpC},
                          std::nullopt});
    }
  } else if (name == "fig7") {
    f.title = "AN perfect link density vs power split";
    f.axis = Axis::kPowerSplit;
    f.grid = linspace(0.02, 1.0, 50);
    for (double le : {2e-3, 1e-3, 2e-4}) {
      ScenarioParams p = base_scenario();
      p.bs_intensity = 8e-4;
      p.eve_intensity = le;
      p.tc = db_to_linear(10.0);
      p.te = db_to_linear(0.0);
      p.antenna = an_pattern(9.0, 15.0, 3.0, 0.5);
      f.curves.push_back({"lambda_e=" + sci(le), p, {Metric::kAnNp}, std::nullopt});
    }
  } else if (name == "fig8") {
    f.title = "AN perfect link density vs power split across beamwidths";
    f.axis = Axis::kPowerSplit;
    f.grid = linspace(0.02, 1.0, 50);
    for (double beam : {9.0, 20.0, 30.0}) {
      ScenarioParams p = base_scenario();
      p.bs_intensity = 8e-4;
      p.eve_intensity = 1e-3;
      p.tc = db_to_linear(10.0);
      p.te = db_to_linear(0.0);
      p.antenna = an_pattern(beam, 15.0, 3.0, 0.5);
      f.curves.push_back({"theta_b=" + sci(beam), p, {Metric::kAnNp}, std::nullopt});
    }
  } else if (name == "fig9") {
    f.title = "mmWave vs microwave perfect link density";
    f.axis = Axis::kEveIntensity;
    f.grid = {1e-5, 2e-5, 5e-5, 1e-4, 2e-4};
    ScenarioParams p = base_scenario();
    p.bs_intensity = 8e-4;
    p.tc = db_to_linear(0.0);
    p.te = db_to_linear(-30.0);
    p.antenna = an_pattern(9.0, 15.0, 3.0, 0.5);
    f.curves.push_back({"mmwave", p, {Metric::kAnNp}, std::nullopt});
    MicrowaveParams mw;
    mw.bs_intensity = 8e-4;
    mw.tc = db_to_linear(0.0);
    mw.te = db_to_linear(-30.0);
    f.curves.push_back({"microwave", p, {Metric::kMicrowaveNp}, mw});
  } else {
    throw ValidationError("unknown preset '" + name + "'");
  }
  return f;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"};
}

FigurePreset figure_preset(const std::string& name) { return make_preset(name); }

ScenarioParams preset(const std::string& name) { return make_preset(name).curves.front().params; }

}  // namespace mmsec
