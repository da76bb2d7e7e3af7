// Acceptance run: one PASS/FAIL line per criterion, CSVs under the output
// directory (first argument, default ./acceptance_out). Further arguments
// select criteria by number, e.g. `acceptance out 1 7`.
//
// Checks are recomputed here from the analytical/empirical/sigma columns
// rather than trusting the row status.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mmsec/analysis_an.hpp"
#include "mmsec/analysis_noise.hpp"
#include "mmsec/cli.hpp"
#include "mmsec/montecarlo.hpp"
#include "mmsec/numerics.hpp"
#include "mmsec/scenario.hpp"

namespace fs = std::filesystem;
using namespace mmsec;
using std::numbers::pi;

namespace {

constexpr std::uint64_t kSeed = 1;
constexpr double kInf = std::numeric_limits<double>::infinity();

fs::path g_out;

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char b[64];
  std::snprintf(b, sizeof b, f, v);
  return b;
}

cli::SweepSpec sweep(const FigurePreset& f, const std::vector<Metric>& metrics, std::uint64_t trials,
                     cli::Mode mode = cli::Mode::kBoth) {
  cli::SweepSpec s;
  s.axis = f.axis;
  s.grid = f.grid;
  s.metrics = metrics;
  s.trials = trials;
  s.seed = kSeed;
  s.mode = mode;
  return s;
}

std::string csv_name(const std::string& tag, const std::string& label) {
  std::string l = label;
  std::replace(l.begin(), l.end(), '=', '_');
  return (g_out / (tag + "_" + l + ".csv")).string();
}

// Runs every curve of a figure for the given metrics and writes its CSVs.
std::vector<std::vector<cli::Row>> run_figure(const std::string& fig, const std::string& tag,
                                              const std::vector<Metric>& metrics, std::uint64_t trials,
                                              std::vector<std::string>* files = nullptr) {
  const FigurePreset f = figure_preset(fig);
  std::vector<std::vector<cli::Row>> out;
  for (const auto& c : f.curves) {
    auto rows = cli::run_sweep(c.params, sweep(f, metrics, trials), c.microwave);
    const std::string path = csv_name(tag, c.label);
    cli::write_csv(path, rows);
    if (files) files->push_back(path);
    out.push_back(std::move(rows));
  }
  return out;
}

// |a - e| <= max(tol, 3 sigma) for every row.
Verdict estimate_check(const std::vector<std::vector<cli::Row>>& curves, double tol, bool use_sigma) {
  Verdict v;
  int n = 0, ok = 0;
  double worst = 0.0;
  for (const auto& rows : curves)
    for (const auto& r : rows) {
      const double d = std::abs(*r.analytical - *r.empirical);
      const double allow = use_sigma ? std::max(tol, 3.0 * *r.sigma) : tol;
      ++n;
      ok += d <= allow;
      worst = std::max(worst, d);
    }
  v.pass = ok == n;
  v.detail = std::to_string(ok) + "/" + std::to_string(n) + " points within " +
             (use_sigma ? "max(" + fmt("%g", tol) + ", 3 sigma)" : fmt("%g", tol)) +
             ", worst |diff| " + fmt("%.4f", worst);
  return v;
}

// Bound direction within 3 sigma and gap <= max_gap.
Verdict bound_check(const std::vector<std::vector<cli::Row>>& curves, bool upper, double max_gap) {
  Verdict v;
  int n = 0, dir_ok = 0, gap_ok = 0;
  double worst_gap = 0.0, worst_violation = 0.0;
  for (const auto& rows : curves)
    for (const auto& r : rows) {
      const double a = *r.analytical, e = *r.empirical, s3 = 3.0 * *r.sigma;
      const double gap = upper ? a - e : e - a;
      ++n;
      dir_ok += gap >= -s3;
      gap_ok += gap <= max_gap;
      worst_gap = std::max(worst_gap, gap);
      worst_violation = std::max(worst_violation, -gap);
    }
  v.pass = dir_ok == n && gap_ok == n;
  v.detail = std::string(upper ? "upper" : "lower") + " bound holds at " + std::to_string(dir_ok) + "/" +
             std::to_string(n) + " (largest wrong-side excess " + fmt("%.4f", worst_violation) +
             "), gap <= " + fmt("%g", max_gap) + " at " + std::to_string(gap_ok) + "/" +
             std::to_string(n) + " (largest gap " + fmt("%.4f", worst_gap) + ")";
  return v;
}

Verdict criterion1() {
  return estimate_check(run_figure("fig1", "c1_fig1", {Metric::kTauN}, 100000), 0.01, true);
}

Verdict criterion2() {
  return bound_check(run_figure("fig2", "c2_fig2", {Metric::kTauCBound}, 100000), true, 0.02);
}

Verdict criterion3() {
  return estimate_check(run_figure("fig3", "c3_fig3", {Metric::kPSecC}, 100000), 0.01, false);
}

Verdict criterion4() {
  return estimate_check(run_figure("fig6", "c4_fig6", {Metric::kPCon, Metric::kPSecN}, 100000), 0.01, false);
}

Verdict criterion5() {
  const auto curves = run_figure("fig4", "c5_fig4", {Metric::kAnPCon}, 100000);
  Verdict v = bound_check(curves, true, 0.02);
  int crossings = 0;
  double last = 0.0;
  for (std::size_t i = 0; i < curves[0].size(); ++i) {
    const double d = *curves[1][i].analytical - *curves[0][i].analytical;
    if (last != 0.0 && d * last < 0.0) ++crossings;
    if (d != 0.0) last = d;
  }
  v.pass = v.pass && crossings > 0;
  v.detail += "; analytical curves cross " + std::to_string(crossings) + " time(s)";
  return v;
}

Verdict criterion6() {
  return bound_check(run_figure("fig5", "c6_fig5", {Metric::kAnPSec}, 100000), false, 0.02);
}

// Kolmogorov distribution tail, with the usual small-sample correction.
double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lam = (sn + 0.12 + 0.11 / sn) * d;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) sum += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * lam * lam);
  return std::clamp(sum, 0.0, 1.0);
}

// KS distance of the sample against the CDF obtained by integrating pdf
// between consecutive order statistics.
double ks_distance(std::vector<double> x, const std::function<double(double)>& pdf) {
  std::sort(x.begin(), x.end());
  numerics::QuadratureSettings q;
  q.rel_tol = 1e-10;
  q.abs_tol = 1e-14;
  double cdf = 0.0, prev = 0.0, d = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    cdf += numerics::integrate(pdf, prev, x[i], q).value;
    prev = x[i];
    d = std::max({d, std::abs(cdf - i / n), std::abs(cdf - (i + 1) / n)});
  }
  return d;
}

double normalization(const std::function<double(double)>& pdf, const ScenarioParams& p, double hi) {
  numerics::QuadratureSettings q;
  q.rel_tol = 1e-12;
  q.abs_tol = 1e-15;
  q.max_subdivisions = 20000;
  const double d = p.blockage.los_radius;
  double total = 0.0, a = 0.0;
  // cuts on a geometric ladder plus D, where the NLOS densities jump
  std::vector<double> cuts = {d};
  for (double c = 1.0; c < 1e5; c *= 1.5) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  for (double c : cuts) {
    if (c <= a || c >= hi) continue;
    total += numerics::integrate(pdf, a, c, q).value;
    a = c;
  }
  q.semi_infinite_scale = std::max(a, 1.0);
  return total + numerics::integrate(pdf, a, hi, q).value;
}

Verdict criterion7() {
  Verdict v;
  std::ostringstream det;
  // normalization and association on the KS scenario and both cities
  ScenarioParams base = preset("fig1");
  base.bs_intensity = 2e-4;
  double worst_assoc = 0.0, worst_norm = 0.0;
  std::vector<ScenarioParams> cases = {base};
  for (const char* city : {"chicago", "manhattan"}) {
    ScenarioParams c = base;
    c.blockage = city_blockage(city);
    cases.push_back(c);
  }
  for (const auto& p : cases) {
    const auto law = analysis::association_probabilities(p);
    worst_assoc = std::max(worst_assoc, std::abs(law.a_los + law.a_nlos - 1.0));
    const double d = p.blockage.los_radius;
    const std::vector<std::pair<std::function<double(double)>, double>> dens = {
        {[&](double r) { return analysis::nearest_los_pdf(p, r); }, d},
        {[&](double r) { return analysis::nearest_nlos_pdf(p, r); }, kInf},
        {[&](double r) { return analysis::serving_distance_joint(p, LinkState::kLos, r) / law.a_los; }, d},
        {[&](double r) { return analysis::serving_distance_joint(p, LinkState::kNlos, r) / law.a_nlos; }, kInf},
    };
    for (const auto& [f, hi] : dens) worst_norm = std::max(worst_norm, std::abs(normalization(f, p, hi) - 1.0));
  }
  const bool assoc_ok = worst_assoc <= 1e-9;
  const bool norm_ok = worst_norm <= 1e-6;
  det << "|A_L+A_N-1| max " << fmt("%.1e", worst_assoc) << ", normalization error max "
      << fmt("%.1e", worst_norm) << "; KS p-values";

  // KS: enough trials that the rarest conditioned sample has 1e5 draws
  const ScenarioParams& p = base;
  const auto law = analysis::association_probabilities(p);
  const double has_los = -std::expm1(-pi * p.blockage.los_fraction * p.bs_intensity *
                                     p.blockage.los_radius * p.blockage.los_radius);
  const double rarest = std::min({law.a_los, law.a_nlos, has_los});
  mc::RunOptions o;
  o.seed = kSeed;
  o.trials = static_cast<std::uint64_t>(std::ceil(1.1e5 / rarest));
  const auto s = mc::sample_distances(p, o);
  const std::size_t n = 100000;
  const auto take = [&](const std::vector<double>& x) {
    return std::vector<double>(x.begin(), x.begin() + static_cast<long>(std::min(n, x.size())));
  };
  struct Ks {
    const char* name;
    std::vector<double> x;
    std::function<double(double)> pdf;
  };
  const std::vector<Ks> tests = {
      {"nearest_los", take(s.nearest_los), [&](double r) { return analysis::nearest_los_pdf(p, r); }},
      {"nearest_nlos", take(s.nearest_nlos), [&](double r) { return analysis::nearest_nlos_pdf(p, r); }},
      {"serving_los", take(s.serving_los),
       [&](double r) { return analysis::serving_distance_joint(p, LinkState::kLos, r) / law.a_los; }},
      {"serving_nlos", take(s.serving_nlos),
       [&](double r) { return analysis::serving_distance_joint(p, LinkState::kNlos, r) / law.a_nlos; }},
  };
  bool ks_ok = true;
  for (const auto& t : tests) {
    const double pv = ks_pvalue(ks_distance(t.x, t.pdf), t.x.size());
    ks_ok = ks_ok && pv > 0.01 && t.x.size() == n;
    det << " " << t.name << "=" << fmt("%.3f", pv) << " (n=" << t.x.size() << ")";
  }
  v.pass = assoc_ok && norm_ok && ks_ok;
  v.detail = det.str();
  return v;
}

Verdict criterion8() {
  ScenarioParams p = preset("fig1");
  p.eve_intensity = figure_preset("fig1").grid.back();
  const std::vector<double> ts = {1e9, 3e9, 1e10, 3e10, 1e11};
  mc::RunOptions o;
  o.trials = 100000;
  o.seed = kSeed;
  const auto est = mc::estimate_plpf_counts(p, ts, o);
  Verdict v;
  std::ostringstream det;
  double worst = 0.0;
  std::ofstream csv(g_out / "c8_plpf.csv", std::ios::binary);
  csv << "t,analytical,empirical,std_error,rel_diff\n";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double a = analysis::plpf_intensity(p, ts[i]);
    const double rel = std::abs(est[i].mean - a) / a;
    worst = std::max(worst, rel);
    v.pass = v.pass && rel <= 0.02;
    csv << fmt("%.8e", ts[i]) << "," << fmt("%.8e", a) << "," << fmt("%.8e", est[i].mean) << ","
        << fmt("%.8e", est[i].std_error) << "," << fmt("%.8e", rel) << "\n";
    det << (i ? ", " : "") << fmt("%.3g", a);
  }
  v.detail = "Lambda_E(0,t) in {" + det.str() + "}, worst relative diff " + fmt("%.4f", worst) +
             " (limit 0.02)";
  return v;
}

Verdict criterion9() {
  const FigurePreset f = figure_preset("fig7");
  const auto curves = run_figure("fig7", "c9_fig7", {Metric::kAnNp}, 20000);
  Verdict v;
  std::ostringstream det;
  const double step = f.grid[1] - f.grid[0];
  std::vector<double> a_star, e_star;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    std::vector<double> a, e;
    for (const auto& r : curves[c]) {
      a.push_back(*r.analytical);
      e.push_back(*r.empirical);
    }
    const std::size_t ka = *cli::argmax(a), ke = *cli::argmax(e);
    const bool interior = ka > 0 && ka + 1 < a.size() && std::count(a.begin(), a.end(), a[ka]) == 1;
    const bool close = std::abs(f.grid[ka] - f.grid[ke]) <= step * 1.000001;
    v.pass = v.pass && interior && close;
    a_star.push_back(f.grid[ka]);
    e_star.push_back(f.grid[ke]);
    det << (c ? "; " : "") << f.curves[c].label << " phi* analytical " << fmt("%.2f", f.grid[ka])
        << (interior ? "" : " (not unique interior)") << ", simulated " << fmt("%.2f", f.grid[ke]);
  }
  // ordering across lambda_E, compared between the two
  const auto order = [](const std::vector<double>& x) {
    std::vector<int> s;
    for (std::size_t i = 1; i < x.size(); ++i) s.push_back(x[i] > x[i - 1] ? 1 : x[i] < x[i - 1] ? -1 : 0);
    return s;
  };
  const auto oa = order(a_star), oe = order(e_star);
  bool same = true;
  for (std::size_t i = 0; i < oa.size(); ++i) same = same && (oa[i] == oe[i] || oa[i] == 0 || oe[i] == 0);
  v.pass = v.pass && same;
  det << "; phi* " << (oa.size() && oa[0] > 0 ? "rises" : "falls") << " as lambda_E decreases, ordering "
      << (same ? "consistent" : "INCONSISTENT") << " between analysis and simulation";
  v.detail = det.str();
  return v;
}

Verdict criterion10() {
  const FigurePreset f = figure_preset("fig9");
  std::vector<std::vector<cli::Row>> rows;
  for (const auto& c : f.curves) {
    auto s = sweep(f, c.metrics, 5000, cli::Mode::kSimulation);
    rows.push_back(cli::run_sweep(c.params, s, c.microwave));
    cli::write_csv(csv_name("c10_fig9", c.label), rows.back());
  }
  Verdict v;
  int wins = 0;
  double min_ratio = kInf;
  for (std::size_t i = 0; i < f.grid.size(); ++i) {
    const double mm = *rows[0][i].empirical, mw = *rows[1][i].empirical;
    wins += mm >= mw;
    if (mw > 0.0) min_ratio = std::min(min_ratio, mm / mw);
  }
  v.pass = wins == static_cast<int>(f.grid.size());
  v.detail = "mmWave N_p >= microwave N_p at " + std::to_string(wins) + "/" + std::to_string(f.grid.size()) +
             " lambda_E points (smallest ratio " + fmt("%.2f", min_ratio) + ")";
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Verdict criterion11() {
  // criterion 3 twice, second time on one thread
  std::vector<std::string> first, second;
  const FigurePreset f = figure_preset("fig3");
  for (int run = 0; run < 2; ++run) {
    for (const auto& c : f.curves) {
      auto s = sweep(f, {Metric::kPSecC}, 100000);
      if (run == 1) s.threads = 1;
      const std::string path = csv_name(run == 0 ? "c11_run1" : "c11_run2", c.label);
      cli::write_csv(path, cli::run_sweep(c.params, s));
      (run == 0 ? first : second).push_back(path);
    }
  }
  Verdict v;
  std::size_t bytes = 0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    const std::string a = slurp(first[i]), b = slurp(second[i]);
    v.pass = v.pass && !a.empty() && a == b;
    bytes += a.size();
  }
  v.detail = std::to_string(first.size()) + " CSV pairs (" + std::to_string(bytes) + " bytes) " +
             (v.pass ? "byte-identical" : "DIFFER");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  g_out = argc > 1 ? argv[1] : "acceptance_out";
  fs::create_directories(g_out);
  std::set<int> pick;
  for (int i = 2; i < argc; ++i) pick.insert(std::atoi(argv[i]));

  const std::vector<std::function<Verdict()>> crit = {criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8,
                                                       criterion9, criterion10, criterion11};
  int failed = 0;
  for (std::size_t i = 0; i < crit.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!pick.empty() && !pick.count(id)) continue;
    Verdict v;
    try {
      v = crit[i]();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("criterion %2d: %s  %s\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
