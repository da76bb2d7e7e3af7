#include "mmsec/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "mmsec/analysis_an.hpp"
#include "mmsec/analysis_noise.hpp"
#include "mmsec/montecarlo.hpp"

namespace mmsec::cli {

namespace an = mmsec::analysis;

Mode parse_mode(const std::string& s) {
  if (s == "analytical") return Mode::kAnalytical;
  if (s == "simulation") return Mode::kSimulation;
  if (s == "both") return Mode::kBoth;
  throw ValidationError("unknown mode '" + s + "' (analytical, simulation, both)");
}

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::kAnalytical: return "analytical";
    case Mode::kSimulation: return "simulation";
    default: return "both";
  }
}

void validate(const SweepSpec& s) {
  if (s.grid.empty()) throw ValidationError("sweep grid is empty");
  if (s.metrics.empty()) throw ValidationError("no metrics requested");
  const bool up = s.grid.size() < 2 || s.grid[1] > s.grid[0];
  for (std::size_t i = 1; i < s.grid.size(); ++i) {
    if (up ? !(s.grid[i] > s.grid[i - 1]) : !(s.grid[i] < s.grid[i - 1]))
      throw ValidationError("sweep grid must be strictly monotone (index " + std::to_string(i) + ")");
  }
  if (s.mode != Mode::kAnalytical && s.trials < 1000)
    throw ValidationError("simulation needs at least 1000 trials");
  if (!(s.tolerance > 0.0)) throw ValidationError("tolerance must be positive");
}

namespace {

double parse_number(const std::string& t) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ValidationError("not a number: '" + t + "'");
  }
  if (used != t.size()) throw ValidationError("not a number: '" + t + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur.erase(0, cur.find_first_not_of(" \t"));
    cur.erase(cur.find_last_not_of(" \t") + 1);
    out.push_back(cur);
  }
  return out;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() < 3 || parts.size() > 4) throw ValidationError("grid range must be lo:hi:n[:log]");
    const double lo = parse_number(parts[0]);
    const double hi = parse_number(parts[1]);
    const double nd = parse_number(parts[2]);
    if (nd < 1 || nd != std::floor(nd)) throw ValidationError("grid point count must be a positive integer");
    const int n = static_cast<int>(nd);
    const bool log = parts.size() == 4;
    if (log && parts[3] != "log") throw ValidationError("unknown grid spacing '" + parts[3] + "'");
    if (log && !(lo > 0.0 && hi > 0.0)) throw ValidationError("log grid needs positive bounds");
    std::vector<double> g;
    for (int i = 0; i < n; ++i) {
      const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
      g.push_back(log ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))) : lo + f * (hi - lo));
    }
    return g;
  }
  std::vector<double> g;
  for (const auto& t : split(text, ',')) {
    if (!t.empty()) g.push_back(parse_number(t));
  }
  return g;
}

std::vector<Metric> parse_metrics(const std::string& text) {
  std::vector<Metric> out;
  for (const auto& t : split(text, ',')) {
    if (!t.empty()) out.push_back(parse_metric(t));
  }
  if (out.empty()) throw ValidationError("no metrics given");
  return out;
}

Relation relation(Metric m) {
  switch (m) {
    case Metric::kTauCBound:
    case Metric::kAnPCon: return Relation::kUpperBound;
    case Metric::kAnPSec: return Relation::kLowerBound;
    default: return Relation::kEstimate;
  }
}

std::optional<double> analytical_value(const ScenarioParams& p, Metric m) {
  switch (m) {
    case Metric::kTauN: return an::secure_connectivity_noncolluding(p);
    case Metric::kTauC: return an::secure_connectivity_colluding_exact(p);
    case Metric::kTauCBound: return an::secure_connectivity_colluding_bound(p);
    case Metric::kPCon: return an::connection_probability(p);
    case Metric::kPSecN: return an::secrecy_probability_noncolluding(p);
    case Metric::kPSecC: return an::secrecy_probability_colluding(p);
    case Metric::kNpN:
      return an::perfect_link_density(p.bs_intensity, an::connection_probability(p),
                                      an::secrecy_probability_noncolluding(p))
          .n_p;
    case Metric::kNpC:
      return an::perfect_link_density(p.bs_intensity, an::connection_probability(p),
                                      an::secrecy_probability_colluding(p))
          .n_p;
    case Metric::kAnPCon: return an::an_connection_probability(p);
    case Metric::kAnPSec: return an::an_secrecy_probability(p);
    case Metric::kAnNp: return an::an_perfect_link_density(p);
    case Metric::kMicrowaveNp: return std::nullopt;
  }
  return std::nullopt;
}

namespace {

enum class Engine { kNoise, kAn, kMicrowave };

Engine engine_of(Metric m) {
  switch (m) {
    case Metric::kAnPCon:
    case Metric::kAnPSec:
    case Metric::kAnNp: return Engine::kAn;
    case Metric::kMicrowaveNp: return Engine::kMicrowave;
    default: return Engine::kNoise;
  }
}

void judge(Row& r, double tolerance) {
  if (!r.analytical || !r.empirical) {
    r.status = r.analytical ? "analytical" : "simulated";
    return;
  }
  const double a = *r.analytical, e = *r.empirical, s3 = 3.0 * r.sigma.value_or(0.0);
  r.abs_diff = std::abs(a - e);
  const double scale = metric_is_density(r.metric) ? std::max(std::abs(a), std::abs(e)) : 1.0;
  bool ok = false;
  switch (relation(r.metric)) {
    case Relation::kEstimate: ok = *r.abs_diff <= std::max(tolerance * scale, s3); break;
    case Relation::kUpperBound: ok = a >= e - s3 && a - e <= 2.0 * tolerance * scale; break;
    case Relation::kLowerBound: ok = a <= e + s3 && e - a <= 2.0 * tolerance * scale; break;
  }
  r.status = ok ? "pass" : "fail";
}

// Evaluates fn(i) for i in [0, n) on a small pool; first exception wins.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    }
  };
  const unsigned t = std::min<unsigned>(mc::resolve_threads(threads), static_cast<unsigned>(n));
  if (t <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < t; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<Row> run_sweep(const ScenarioParams& p, const SweepSpec& s,
                           const std::optional<MicrowaveParams>& microwave,
                           const std::function<void(const Row&)>& sink) {
  validate(s);
  p.validate();
  const std::size_t np = s.grid.size(), nm = s.metrics.size();
  std::vector<ScenarioParams> pts;
  for (std::size_t i = 0; i < np; ++i) {
    try {
      pts.push_back(with_axis(p, s.axis, s.grid[i]));
      pts.back().validate();
    } catch (const ValidationError& e) {
      throw ValidationError("grid point " + std::to_string(i) + " (" + axis_name(s.axis) + "=" +
                            std::to_string(s.grid[i]) + "): " + e.what());
    }
  }

  // Empirical side: one call per engine so each engine shares realizations
  // across the grid.
  std::vector<std::vector<std::optional<mc::EmpiricalMetrics>>> emp(
      np, std::vector<std::optional<mc::EmpiricalMetrics>>(nm));
  if (s.mode != Mode::kAnalytical) {
    mc::RunOptions o;
    o.trials = s.trials;
    o.seed = s.seed;
    o.threads = s.threads;
    for (Engine eng : {Engine::kNoise, Engine::kAn, Engine::kMicrowave}) {
      std::vector<Metric> ms;
      std::vector<std::size_t> slot;
      for (std::size_t j = 0; j < nm; ++j) {
        if (engine_of(s.metrics[j]) == eng) {
          ms.push_back(s.metrics[j]);
          slot.push_back(j);
        }
      }
      if (ms.empty()) continue;
      if (eng == Engine::kMicrowave) {
        if (!microwave) throw ValidationError("microwave_n_p needs microwave baseline parameters");
        if (s.axis != Axis::kEveIntensity) throw ValidationError("microwave_n_p only sweeps lambda_e");
        const auto r = mc::estimate_microwave_grid(*microwave, s.grid, o);
        for (std::size_t i = 0; i < np; ++i) emp[i][slot[0]] = r[i];
        continue;
      }
      const auto r = eng == Engine::kNoise ? mc::estimate_noise_grid(p, s.axis, s.grid, ms, o)
                                           : mc::estimate_an_grid(p, s.axis, s.grid, ms, o);
      for (std::size_t i = 0; i < np; ++i)
        for (std::size_t k = 0; k < ms.size(); ++k) emp[i][slot[k]] = r[i][k];
    }
  }

  std::vector<std::vector<std::optional<double>>> ana(np, std::vector<std::optional<double>>(nm));
  std::vector<std::string> errors(np);
  if (s.mode != Mode::kSimulation) {
    parallel_for(np, s.threads, [&](std::size_t i) {
      try {
        for (std::size_t j = 0; j < nm; ++j) ana[i][j] = analytical_value(pts[i], s.metrics[j]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
  }

  std::vector<Row> rows;
  for (std::size_t i = 0; i < np; ++i) {
    if (!errors[i].empty())
      throw std::runtime_error("grid point " + std::to_string(i) + " (" + axis_name(s.axis) + "=" +
                             std::to_string(s.grid[i]) + "): " + errors[i]);
    for (std::size_t j = 0; j < nm; ++j) {
      Row r;
      r.axis_name = axis_name(s.axis);
      r.axis_value = s.grid[i];
      r.metric = s.metrics[j];
      r.analytical = ana[i][j];
      if (emp[i][j]) {
        r.empirical = emp[i][j]->estimate;
        r.ci95 = emp[i][j]->ci_halfwidth;
        r.sigma = emp[i][j]->sigma;
      }
      judge(r, s.tolerance);
      if (sink) sink(r);
      rows.push_back(r);
    }
  }
  return rows;
}

std::string csv_header() { return "axis_name,axis_value,metric,analytical,empirical,ci95,abs_diff,status"; }

namespace {

std::string num(const std::optional<double>& v) {
  if (!v) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.8e", *v);
  return buf;
}

}  // namespace

std::string csv_row(const Row& r) {
  return r.axis_name + "," + num(r.axis_value) + "," + metric_name(r.metric) + "," + num(r.analytical) +
         "," + num(r.empirical) + "," + num(r.ci95) + "," + num(r.abs_diff) + "," + r.status;
}

void write_csv(const std::string& path, const std::vector<Row>& rows) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << csv_header() << "\n";
  for (const auto& r : rows) f << csv_row(r) << "\n";
}

std::optional<std::size_t> argmax(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<double> column(const std::vector<Row>& rows, Metric m, bool analytical) {
  std::vector<double> v;
  for (const auto& r : rows) {
    if (r.metric != m) continue;
    const auto& x = analytical ? r.analytical : r.empirical;
    v.push_back(x.value_or(std::nan("")));
  }
  return v;
}

bool has_values(const std::vector<double>& v) {
  return !v.empty() && std::none_of(v.begin(), v.end(), [](double x) { return std::isnan(x); });
}

// Unique maximum strictly inside the grid.
bool unique_interior_max(const std::vector<double>& v) {
  const auto k = argmax(v);
  if (!k || *k == 0 || *k + 1 == v.size()) return false;
  return std::count(v.begin(), v.end(), v[*k]) == 1;
}

}  // namespace

FigureReport reproduce_figure(const std::string& name, std::uint64_t trials, std::uint64_t seed,
                              const std::string& out_dir, Mode mode, double tolerance, unsigned threads) {
  const FigurePreset fig = figure_preset(name);
  std::filesystem::create_directories(out_dir);
  FigureReport rep;
  std::vector<std::vector<Row>> curves;

  for (const auto& c : fig.curves) {
    SweepSpec s;
    s.axis = fig.axis;
    s.grid = fig.grid;
    s.metrics = c.metrics;
    s.trials = trials;
    s.seed = seed;
    s.mode = c.microwave ? Mode::kSimulation : mode;
    if (c.microwave && mode == Mode::kAnalytical) {
      curves.emplace_back();
      rep.summary.push_back(c.label + ": simulation-only curve skipped in analytical mode");
      continue;
    }
    s.tolerance = tolerance;
    s.threads = threads;
    auto rows = run_sweep(c.params, s, c.microwave);
    const std::string path = (std::filesystem::path(out_dir) / (name + "_" + c.label + ".csv")).string();
    write_csv(path, rows);
    rep.files.push_back(path);

    std::size_t pass = 0, fail = 0;
    for (const auto& r : rows) {
      if (r.status == "pass") ++pass;
      if (r.status == "fail") ++fail;
    }
    if (fail) rep.all_pass = false;
    if (pass + fail > 0)
      rep.summary.push_back(c.label + ": " + std::to_string(pass) + " pass, " + std::to_string(fail) + " fail");
    curves.push_back(std::move(rows));
  }

  if (name == "fig4" && curves.size() == 2) {
    const auto a = column(curves[0], Metric::kAnPCon, true);
    const auto b = column(curves[1], Metric::kAnPCon, true);
    if (has_values(a) && has_values(b)) {
      bool below = false, above = false;
      for (std::size_t i = 0; i < a.size(); ++i) {
        below |= b[i] < a[i];
        above |= b[i] > a[i];
      }
      const bool cross = below && above;
      rep.summary.push_back(std::string("analytical p_con curves cross: ") + (cross ? "yes" : "no"));
      if (!cross) rep.all_pass = false;
    }
  }

  if (name == "fig7" || name == "fig8") {
    for (std::size_t c = 0; c < curves.size(); ++c) {
      for (bool analytical : {true, false}) {
        const auto v = column(curves[c], Metric::kAnNp, analytical);
        if (!has_values(v)) continue;
        const std::size_t k = *argmax(v);
        std::string line = fig.curves[c].label + (analytical ? " analytical" : " simulated") +
                           " argmax phi* = " + fmt(fig.grid[k]);
        if (analytical) {
          const bool ok = unique_interior_max(v);
          line += ok ? " (unique interior)" : " (NOT a unique interior maximum)";
          if (!ok) rep.all_pass = false;
        }
        rep.summary.push_back(line);
      }
    }
  }

  if (name == "fig9" && curves.size() == 2) {
    const auto mm = column(curves[0], Metric::kAnNp, false);
    const auto mw = column(curves[1], Metric::kMicrowaveNp, false);
    if (has_values(mm) && has_values(mw)) {
      std::size_t wins = 0;
      for (std::size_t i = 0; i < mm.size(); ++i) wins += mm[i] >= mw[i];
      rep.summary.push_back("mmwave N_p >= microwave N_p at " + std::to_string(wins) + "/" +
                            std::to_string(mm.size()) + " grid points");
      if (wins != mm.size()) rep.all_pass = false;
    }
  }

  const std::string sp = (std::filesystem::path(out_dir) / (name + "_summary.txt")).string();
  std::ofstream f(sp, std::ios::binary);
  f << name << ": " << fig.title << "\n";
  f << "mode=" << mode_name(mode) << " trials=" << trials << " seed=" << seed << "\n";
  for (const auto& l : rep.summary) f << l << "\n";
  rep.files.push_back(sp);
  return rep;
}

}  // namespace mmsec::cli
