#include "mmsec/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "mmsec/numerics.hpp"

namespace mmsec::mc {

using std::numbers::pi;

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kBlock = 256;

double uniform(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Integer-shape gamma(n, 1) as a sum of n unit exponentials.
double gamma_int(Rng& rng, int n) {
  double prod = 1.0;
  for (int i = 0; i < n; ++i) prod *= 1.0 - uniform(rng);
  return -std::log(prod);
}

long long poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  return std::poisson_distribution<long long>(mean)(rng);
}

// Radius of a uniform point in a disc of radius w; never exactly zero.
double disc_radius(Rng& rng, double w) { return w * std::sqrt(1.0 - uniform(rng)); }

double path_gain(const LinkModel& lk, double d2) {
  return lk.alpha == 2.0 ? lk.intercept / d2 : lk.intercept * std::pow(d2, -0.5 * lk.alpha);
}

double angle_gap(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * pi)); }

struct Links {
  LinkModel los;
  LinkModel nlos;
  double c = 0.0;
  double d2 = 0.0;  // squared LOS radius

  explicit Links(const ScenarioParams& p)
      : los(p.link(LinkState::kLos)),
        nlos(p.link(LinkState::kNlos)),
        c(p.blockage.los_fraction),
        d2(p.blockage.los_radius * p.blockage.los_radius) {}
  Links(LinkModel l, LinkModel n, double c_, double d2_) : los(l), nlos(n), c(c_), d2(d2_) {}

  // LOS coin only drawn inside the LOS ball.
  const LinkModel& draw(Rng& rng, double dist2) const {
    if (dist2 <= d2 && c > 0.0 && uniform(rng) < c) return los;
    return nlos;
  }
};

struct SectorPmf {
  double main = 0.0;
  double side = 0.0;
  double p_main = 0.0;
};

SectorPmf sector_pmf(const ScenarioParams& p) {
  if (p.uses_an()) return {p.an().info_gain, 0.0, p.an().info_probability()};
  const AntennaPattern& a = p.sectored();
  return {a.main_gain, a.side_gain, a.main_probability()};
}

// Trials are cut into fixed blocks; each block gets its own accumulator and
// blocks are merged in index order, so results do not depend on the thread
// count.
template <class Acc, class Fn>
Acc run_blocks(const RunOptions& o, const Acc& proto, Fn&& fn) {
  if (o.trials == 0) throw ValidationError("trials must be positive");
  const std::uint64_t nblocks = (o.trials + kBlock - 1) / kBlock;
  std::vector<Acc> parts(nblocks, proto);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;

  const auto worker = [&] {
    try {
      for (;;) {
        const std::uint64_t b = next.fetch_add(1);
        if (b >= nblocks) break;
        const std::uint64_t end = std::min(o.trials, (b + 1) * kBlock);
        for (std::uint64_t t = b * kBlock; t < end; ++t) {
          Rng rng(substream_seed(o.seed, t));
          fn(parts[b], rng);
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lk(error_mu);
      if (!error) error = std::current_exception();
      next.store(nblocks);
    }
  };

  const unsigned nthreads =
      static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(o.threads), nblocks));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  Acc total = proto;
  for (const auto& part : parts) total.merge(part);
  return total;
}

void add_counts(std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

struct GridPoint {
  double ratio = 1.0;  // eavesdropper thinning: keep if mark < ratio
  double tc = 1.0;
  double te = 1.0;
  double phi = 1.0;
};

bool shares_world(Axis a, bool an) {
  switch (a) {
    case Axis::kEveIntensity:
    case Axis::kTcDb:
    case Axis::kTeDb:
      return true;
    case Axis::kPowerSplit:
      return an;
    default:
      return false;
  }
}

// Uniform bucket grid over the BS window, visited in square rings around a
// query point so nearby points come first.
class CellIndex {
 public:
  void build(const std::vector<Vec2>& pts, double half_extent) {
    n_ = 64;
    x0_ = -half_extent;
    cell_ = 2.0 * half_extent / n_;
    start_.assign(static_cast<std::size_t>(n_ * n_) + 1, 0);
    items_.resize(pts.size());
    std::vector<int> cell_of(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      cell_of[i] = clamp_cell(pts[i].x) * n_ + clamp_cell(pts[i].y);
      ++start_[static_cast<std::size_t>(cell_of[i]) + 1];
    }
    for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
    std::vector<int> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < pts.size(); ++i) items_[static_cast<std::size_t>(fill[cell_of[i]]++)] = static_cast<int>(i);
  }

  // fn(index) returns true to stop. Returns true when stopped early.
  template <class Fn>
  bool visit(Vec2 z, Fn&& fn) const {
    const int cx = static_cast<int>(std::floor((z.x - x0_) / cell_));
    const int cy = static_cast<int>(std::floor((z.y - x0_) / cell_));
    if (scan_at(cx, cy, fn)) return true;
    for (int k = 1;; ++k) {
      // rings 0..k-1 already cover the whole grid
      if (cx - k + 1 <= 0 && cx + k - 1 >= n_ - 1 && cy - k + 1 <= 0 && cy + k - 1 >= n_ - 1) return false;
      for (int i = cx - k; i <= cx + k; ++i)
        if (scan_at(i, cy - k, fn) || scan_at(i, cy + k, fn)) return true;
      for (int j = cy - k + 1; j <= cy + k - 1; ++j)
        if (scan_at(cx - k, j, fn) || scan_at(cx + k, j, fn)) return true;
    }
  }

 private:
  int clamp_cell(double v) const {
    return std::clamp(static_cast<int>(std::floor((v - x0_) / cell_)), 0, n_ - 1);
  }
  template <class Fn>
  bool scan_at(int i, int j, Fn& fn) const {
    if (i < 0 || i >= n_ || j < 0 || j >= n_) return false;
    const int c = i * n_ + j;
    for (int q = start_[static_cast<std::size_t>(c)]; q < start_[static_cast<std::size_t>(c) + 1]; ++q)
      if (fn(items_[static_cast<std::size_t>(q)])) return true;
    return false;
  }

  int n_ = 0;
  double x0_ = 0.0;
  double cell_ = 1.0;
  std::vector<int> start_;
  std::vector<int> items_;
};

// ---------------------------------------------------------------------------
// Noise-limited world

struct NoiseAcc {
  std::vector<std::uint64_t> con, tau_n, tau_c, sec_n, sec_c;
  std::uint64_t voids = 0;
  // scratch, not merged
  std::vector<double> emax, esum;

  explicit NoiseAcc(std::size_t k) : con(k), tau_n(k), tau_c(k), sec_n(k), sec_c(k) {}
  void merge(const NoiseAcc& o) {
    add_counts(con, o.con);
    add_counts(tau_n, o.tau_n);
    add_counts(tau_c, o.tau_c);
    add_counts(sec_n, o.sec_n);
    add_counts(sec_c, o.sec_c);
    voids += o.voids;
  }
};

NoiseAcc run_noise(const ScenarioParams& world, const std::vector<GridPoint>& pts, const RunOptions& o,
                   double w) {
  const Links links(world);
  const SectorPmf pmf = sector_pmf(world);
  const double n0 = world.noise();
  const double pt = world.tx_power;
  const double area = pi * w * w;
  const double serve_gain = pmf.main;

  return run_blocks(o, NoiseAcc(pts.size()), [&](NoiseAcc& acc, Rng& rng) {
    // Serving BS: smallest path loss over the window.
    const long long nb = poisson(rng, world.bs_intensity * area);
    double best = 0.0;
    const LinkModel* best_link = nullptr;
    for (long long i = 0; i < nb; ++i) {
      const double r = disc_radius(rng, w);
      const LinkModel& lk = links.draw(rng, r * r);
      const double g = path_gain(lk, r * r);
      if (g > best) {
        best = g;
        best_link = &lk;
      }
    }
    const std::size_t k = pts.size();
    if (!best_link) {
      ++acc.voids;
      for (std::size_t i = 0; i < k; ++i) {
        ++acc.sec_n[i];
        ++acc.sec_c[i];
      }
      return;
    }
    const double signal = serve_gain * best * gamma_int(rng, best_link->shape);

    acc.emax.assign(k, 0.0);
    acc.esum.assign(k, 0.0);
    const long long ne = poisson(rng, world.eve_intensity * area);
    for (long long z = 0; z < ne; ++z) {
      const double r = disc_radius(rng, w);
      const LinkModel& lk = links.draw(rng, r * r);
      const double gain = uniform(rng) < pmf.p_main ? pmf.main : pmf.side;
      const double mark = uniform(rng);
      const double e = gain * path_gain(lk, r * r) * gamma_int(rng, lk.shape);
      for (std::size_t i = 0; i < k; ++i) {
        if (mark >= pts[i].ratio) continue;
        acc.emax[i] = std::max(acc.emax[i], e);
        acc.esum[i] += e;
      }
    }
    for (std::size_t i = 0; i < k; ++i) {
      if (pt * signal >= pts[i].tc * n0) ++acc.con[i];
      if (signal >= acc.emax[i]) ++acc.tau_n[i];
      if (signal >= acc.esum[i]) ++acc.tau_c[i];
      if (pt * acc.emax[i] <= pts[i].te * n0) ++acc.sec_n[i];
      if (pt * acc.esum[i] <= pts[i].te * n0) ++acc.sec_c[i];
    }
  });
}

EmpiricalMetrics noise_metric(const NoiseAcc& acc, std::size_t i, Metric m, double bs_intensity,
                              const RunOptions& o) {
  EmpiricalMetrics out;
  switch (m) {
    case Metric::kTauN: out = wilson(acc.tau_n[i], o.trials, o.seed); break;
    case Metric::kTauC:
    case Metric::kTauCBound: out = wilson(acc.tau_c[i], o.trials, o.seed); break;
    case Metric::kPCon: out = wilson(acc.con[i], o.trials, o.seed); break;
    case Metric::kPSecN: out = wilson(acc.sec_n[i], o.trials, o.seed); break;
    case Metric::kPSecC: out = wilson(acc.sec_c[i], o.trials, o.seed); break;
    case Metric::kNpN:
      out = density_product(bs_intensity, wilson(acc.con[i], o.trials, o.seed),
                            wilson(acc.sec_n[i], o.trials, o.seed));
      break;
    case Metric::kNpC:
      out = density_product(bs_intensity, wilson(acc.con[i], o.trials, o.seed),
                            wilson(acc.sec_c[i], o.trials, o.seed));
      break;
    default:
      throw ValidationError("metric '" + metric_name(m) + "' is not a noise-limited metric");
  }
  out.voids = acc.voids;
  return out;
}

// ---------------------------------------------------------------------------
// AN world, shared by the mmWave model and the microwave baseline.

struct AnModel {
  Links links;
  double bs_intensity;
  double tx_power;
  double n0;
  double info_gain;
  double an_gain;
  double half_width;  // radians
};

AnModel an_model(const ScenarioParams& p) {
  const AnPattern& a = p.an();
  return {Links(p), p.bs_intensity, p.tx_power, p.noise(), a.info_gain, a.an_gain,
          a.beamwidth_deg * pi / 180.0};
}

AnModel microwave_model(const MicrowaveParams& mw) {
  const LinkModel lk{1.0, mw.alpha, 1};
  return {Links(lk, lk, 0.0, 0.0), mw.bs_intensity, 1.0, 0.0, mw.gain_ratio(), 1.0,
          0.5 * mw.info_sector_deg * pi / 180.0};
}

struct AnAcc {
  std::vector<std::uint64_t> con, sec;
  std::uint64_t voids = 0;
  // scratch
  std::vector<Vec2> pos;
  std::vector<double> ori, pl;
  std::vector<const LinkModel*> link;
  std::vector<char> secure;
  CellIndex index;

  explicit AnAcc(std::size_t k) : con(k), sec(k) {}
  AnAcc(const AnAcc& o) : con(o.con), sec(o.sec), voids(o.voids) {}
  void merge(const AnAcc& o) {
    add_counts(con, o.con);
    add_counts(sec, o.sec);
    voids += o.voids;
  }
};

AnAcc run_an(const AnModel& m, double eve_intensity, const std::vector<GridPoint>& pts,
             const RunOptions& o, double w) {
  const double area = pi * w * w;
  const double info_p = m.half_width / pi;
  return run_blocks(o, AnAcc(pts.size()), [&](AnAcc& acc, Rng& rng) {
    const std::size_t k = pts.size();
    const long long nb = poisson(rng, m.bs_intensity * area);
    acc.pos.resize(static_cast<std::size_t>(nb));
    acc.ori.resize(static_cast<std::size_t>(nb));
    acc.pl.resize(static_cast<std::size_t>(nb));
    acc.link.resize(static_cast<std::size_t>(nb));
    long long best = -1;
    for (long long i = 0; i < nb; ++i) {
      const auto u = static_cast<std::size_t>(i);
      const double r = disc_radius(rng, w);
      const double th = 2.0 * pi * uniform(rng);
      acc.pos[u] = {r * std::cos(th), r * std::sin(th)};
      acc.ori[u] = 2.0 * pi * uniform(rng);
      acc.link[u] = &m.links.draw(rng, r * r);
      acc.pl[u] = path_gain(*acc.link[u], r * r);
      if (best < 0 || acc.pl[u] > acc.pl[static_cast<std::size_t>(best)]) best = i;
    }
    if (best < 0) {
      ++acc.voids;
      for (std::size_t i = 0; i < k; ++i) ++acc.sec[i];
      return;
    }
    const auto sb = static_cast<std::size_t>(best);
    const Vec2 xs = acc.pos[sb];
    acc.ori[sb] = std::atan2(-xs.y, -xs.x);

    // Typical user.
    const double signal = m.tx_power * m.info_gain * acc.pl[sb] * gamma_int(rng, acc.link[sb]->shape);
    double i_info = 0.0, i_an = 0.0;
    for (std::size_t i = 0; i < acc.pos.size(); ++i) {
      if (i == sb) continue;
      const double p = acc.pl[i] * gamma_int(rng, acc.link[i]->shape);
      const double bearing = std::atan2(-acc.pos[i].y, -acc.pos[i].x);
      if (angle_gap(acc.ori[i], bearing) <= m.half_width) i_info += p;
      else i_an += p;
    }
    i_info *= m.tx_power * m.info_gain;
    i_an *= m.tx_power * m.an_gain;
    for (std::size_t i = 0; i < k; ++i) {
      const double phi = pts[i].phi;
      if (phi > 0.0 && phi * signal >= pts[i].tc * (phi * i_info + (1.0 - phi) * i_an + m.n0)) ++acc.con[i];
    }

    // Eavesdroppers inside the transmitting BS's information sector.
    Vec2 tx{0.0, 0.0};
    double boresight = 0.0;
    std::size_t skip = acc.pos.size();
    if (o.secrecy_frame == SecrecyFrame::kServingBs) {
      tx = xs;
      boresight = acc.ori[sb];
      skip = sb;
    } else {
      boresight = 2.0 * pi * uniform(rng);
    }
    acc.secure.assign(k, 1);
    bool indexed = false;
    const long long ne = poisson(rng, eve_intensity * info_p * area);
    for (long long e = 0; e < ne; ++e) {
      const double r = disc_radius(rng, w);
      const double th = boresight + m.half_width * (2.0 * uniform(rng) - 1.0);
      const Vec2 z{tx.x + r * std::cos(th), tx.y + r * std::sin(th)};
      const double mark = uniform(rng);
      const LinkModel& lk = m.links.draw(rng, r * r);
      const double sz = m.tx_power * m.info_gain * path_gain(lk, r * r) * gamma_int(rng, lk.shape);

      // SINR <= SNR, so only points above the threshold on noise alone need
      // the AN field.
      double max_need = 0.0;
      bool any = false;
      for (std::size_t i = 0; i < k; ++i) {
        if (!acc.secure[i] || mark >= pts[i].ratio || pts[i].phi <= 0.0) continue;
        if (pts[i].te <= 0.0) {
          acc.secure[i] = 0;
          continue;
        }
        const double wanted = pts[i].phi * sz / pts[i].te;
        if (wanted <= m.n0) continue;
        any = true;
        max_need = std::max(max_need, pts[i].phi < 1.0 ? (wanted - m.n0) / (1.0 - pts[i].phi) : kInf);
      }
      if (!any) continue;

      if (!indexed) {
        acc.index.build(acc.pos, w);
        indexed = true;
      }
      double field = 0.0;
      acc.index.visit(z, [&](int idx) {
        const auto i = static_cast<std::size_t>(idx);
        if (i == skip) return false;
        const double dx = z.x - acc.pos[i].x;
        const double dy = z.y - acc.pos[i].y;
        if (angle_gap(acc.ori[i], std::atan2(dy, dx)) <= m.half_width) return false;
        const double d2 = dx * dx + dy * dy;
        const LinkModel& l = m.links.draw(rng, d2);
        field += m.tx_power * m.an_gain * path_gain(l, d2) * gamma_int(rng, l.shape);
        return field >= max_need;
      });
      for (std::size_t i = 0; i < k; ++i) {
        if (!acc.secure[i] || mark >= pts[i].ratio || pts[i].phi <= 0.0) continue;
        if ((1.0 - pts[i].phi) * field + m.n0 < pts[i].phi * sz / pts[i].te) acc.secure[i] = 0;
      }
    }
    for (std::size_t i = 0; i < k; ++i)
      if (acc.secure[i]) ++acc.sec[i];
  });
}

EmpiricalMetrics an_metric(const AnAcc& acc, std::size_t i, Metric m, double bs_intensity,
                           const RunOptions& o) {
  EmpiricalMetrics out;
  switch (m) {
    case Metric::kAnPCon: out = wilson(acc.con[i], o.trials, o.seed); break;
    case Metric::kAnPSec: out = wilson(acc.sec[i], o.trials, o.seed); break;
    case Metric::kAnNp:
    case Metric::kMicrowaveNp:
      out = density_product(bs_intensity, wilson(acc.con[i], o.trials, o.seed),
                            wilson(acc.sec[i], o.trials, o.seed));
      break;
    default:
      throw ValidationError("metric '" + metric_name(m) + "' is not an AN metric");
  }
  out.voids = acc.voids;
  return out;
}

struct MeanAcc {
  std::vector<double> sum, sum2;
  explicit MeanAcc(std::size_t k) : sum(k), sum2(k) {}
  void add(std::size_t i, double v) {
    sum[i] += v;
    sum2[i] += v * v;
  }
  void merge(const MeanAcc& o) {
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum[i] += o.sum[i];
      sum2[i] += o.sum2[i];
    }
  }
  std::vector<MeanEstimate> finish(std::uint64_t n) const {
    std::vector<MeanEstimate> out(sum.size());
    const auto dn = static_cast<double>(n);
    for (std::size_t i = 0; i < sum.size(); ++i) {
      const double mean = sum[i] / dn;
      const double var = std::max(0.0, sum2[i] / dn - mean * mean);
      out[i] = {mean, std::sqrt(var / std::max(1.0, dn - 1.0))};
    }
    return out;
  }
};

// Eavesdropper marks around a BS at the origin: (gain * fading * path gain).
template <class Fn>
void for_each_eve(const ScenarioParams& p, const Links& links, const SectorPmf& pmf, double w, Rng& rng,
                  Fn&& fn) {
  const long long ne = poisson(rng, p.eve_intensity * pi * w * w);
  for (long long z = 0; z < ne; ++z) {
    const double r = disc_radius(rng, w);
    const LinkModel& lk = links.draw(rng, r * r);
    const double gain = uniform(rng) < pmf.p_main ? pmf.main : pmf.side;
    fn(gain * path_gain(lk, r * r) * gamma_int(rng, lk.shape));
  }
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t trial) {
  const auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(master) ^ trial);
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MMSEC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

EmpiricalMetrics wilson(std::uint64_t successes, std::uint64_t trials, std::uint64_t seed) {
  if (trials == 0) throw ValidationError("wilson: zero trials");
  if (successes > trials) throw ValidationError("wilson: successes exceed trials");
  const auto n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = kZ95 * kZ95;
  const double half = kZ95 / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  EmpiricalMetrics out;
  out.estimate = p;
  out.ci_halfwidth = half;
  out.sigma = half / kZ95;
  out.trials = trials;
  out.successes = successes;
  out.seed = seed;
  return out;
}

EmpiricalMetrics density_product(double bs_intensity, const EmpiricalMetrics& con,
                                 const EmpiricalMetrics& sec) {
  EmpiricalMetrics out;
  out.estimate = bs_intensity * con.estimate * sec.estimate;
  out.sigma = bs_intensity * std::hypot(sec.estimate * con.sigma, con.estimate * sec.sigma);
  out.ci_halfwidth = kZ95 * out.sigma;
  out.trials = con.trials;
  out.seed = con.seed;
  out.voids = con.voids;
  return out;
}

double window_radius(const ScenarioParams& p) {
  const double gain = p.uses_an() ? p.an().info_gain : p.sectored().main_gain;
  const LinkModel n = p.link(LinkState::kNlos);
  const double r = std::pow(1000.0 * p.tx_power * gain * n.intercept / p.noise(), 1.0 / n.alpha);
  return std::max(5.0 * p.blockage.los_radius, r);
}

NetworkRealization sample_realization(const ScenarioParams& p, double w, Rng& rng) {
  p.validate();
  if (!(w > 0.0)) throw ValidationError("window radius must be positive");
  const Links links(p);
  const SectorPmf pmf = sector_pmf(p);
  NetworkRealization out;
  out.window_radius = w;

  const long long nb = poisson(rng, p.bs_intensity * pi * w * w);
  out.bs.reserve(static_cast<std::size_t>(nb));
  for (long long i = 0; i < nb; ++i) {
    BsPoint b;
    b.distance = disc_radius(rng, w);
    const double th = 2.0 * pi * uniform(rng);
    b.pos = {b.distance * std::cos(th), b.distance * std::sin(th)};
    const LinkModel& lk = links.draw(rng, b.distance * b.distance);
    b.los = (&lk == &links.los);
    b.path_loss = path_gain(lk, b.distance * b.distance);
    b.orientation = 2.0 * pi * uniform(rng);
    if (out.serving < 0 || b.path_loss > out.bs[static_cast<std::size_t>(out.serving)].path_loss)
      out.serving = static_cast<int>(out.bs.size());
    out.bs.push_back(b);
  }

  Vec2 centre;
  if (!out.is_void()) {
    BsPoint& s = out.bs[static_cast<std::size_t>(out.serving)];
    s.orientation = std::atan2(-s.pos.y, -s.pos.x);
    out.serving_fading = gamma_int(rng, s.los ? links.los.shape : links.nlos.shape);
    centre = s.pos;
  }

  const long long ne = poisson(rng, p.eve_intensity * pi * w * w);
  out.eves.reserve(static_cast<std::size_t>(ne));
  for (long long z = 0; z < ne; ++z) {
    EvePoint e;
    e.distance = disc_radius(rng, w);
    const double th = 2.0 * pi * uniform(rng);
    e.pos = {centre.x + e.distance * std::cos(th), centre.y + e.distance * std::sin(th)};
    const LinkModel& lk = links.draw(rng, e.distance * e.distance);
    e.los = (&lk == &links.los);
    e.gain = uniform(rng) < pmf.p_main ? pmf.main : pmf.side;
    e.fading = gamma_int(rng, lk.shape);
    out.eves.push_back(e);
  }
  return out;
}

std::vector<std::vector<EmpiricalMetrics>> estimate_noise_grid(const ScenarioParams& p, Axis axis,
                                                               const std::vector<double>& grid,
                                                               const std::vector<Metric>& metrics,
                                                               const RunOptions& o) {
  p.validate();
  if (grid.empty()) throw ValidationError("empty grid");
  std::vector<ScenarioParams> pts;
  for (double g : grid) {
    pts.push_back(with_axis(p, axis, g));
    pts.back().validate();
  }
  std::vector<std::vector<EmpiricalMetrics>> out(grid.size());
  const auto fill = [&](const NoiseAcc& acc, std::size_t slot, std::size_t i) {
    for (Metric m : metrics) out[i].push_back(noise_metric(acc, slot, m, pts[i].bs_intensity, o));
  };

  if (shares_world(axis, false)) {
    ScenarioParams world = pts.front();
    double lmax = 0.0;
    for (const auto& q : pts) lmax = std::max(lmax, q.eve_intensity);
    world.eve_intensity = lmax;
    std::vector<GridPoint> gp;
    for (const auto& q : pts) gp.push_back({lmax > 0.0 ? q.eve_intensity / lmax : 1.0, q.tc, q.te, 1.0});
    const NoiseAcc acc = run_noise(world, gp, o, o.window > 0.0 ? o.window : window_radius(world));
    for (std::size_t i = 0; i < pts.size(); ++i) fill(acc, i, i);
  } else {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const NoiseAcc acc = run_noise(pts[i], {GridPoint{1.0, pts[i].tc, pts[i].te, 1.0}}, o,
                                     o.window > 0.0 ? o.window : window_radius(pts[i]));
      fill(acc, 0, i);
    }
  }
  return out;
}

EmpiricalMetrics estimate_noise_limited(const ScenarioParams& p, Metric m, const RunOptions& o) {
  return estimate_noise_grid(p, Axis::kEveIntensity, {p.eve_intensity}, {m}, o)[0][0];
}

std::vector<std::vector<EmpiricalMetrics>> estimate_an_grid(const ScenarioParams& p, Axis axis,
                                                            const std::vector<double>& grid,
                                                            const std::vector<Metric>& metrics,
                                                            const RunOptions& o) {
  p.validate();
  if (grid.empty()) throw ValidationError("empty grid");
  std::vector<ScenarioParams> pts;
  for (double g : grid) {
    pts.push_back(with_axis(p, axis, g));
    pts.back().validate();
  }
  std::vector<std::vector<EmpiricalMetrics>> out(grid.size());
  const auto fill = [&](const AnAcc& acc, std::size_t slot, std::size_t i) {
    for (Metric m : metrics) out[i].push_back(an_metric(acc, slot, m, pts[i].bs_intensity, o));
  };

  if (shares_world(axis, true)) {
    const ScenarioParams& world = pts.front();
    double lmax = 0.0;
    for (const auto& q : pts) lmax = std::max(lmax, q.eve_intensity);
    std::vector<GridPoint> gp;
    for (const auto& q : pts)
      gp.push_back({lmax > 0.0 ? q.eve_intensity / lmax : 1.0, q.tc, q.te, q.an().power_split});
    const AnAcc acc =
        run_an(an_model(world), lmax, gp, o, o.window > 0.0 ? o.window : window_radius(world));
    for (std::size_t i = 0; i < pts.size(); ++i) fill(acc, i, i);
  } else {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& q = pts[i];
      const AnAcc acc = run_an(an_model(q), q.eve_intensity, {GridPoint{1.0, q.tc, q.te, q.an().power_split}},
                               o, o.window > 0.0 ? o.window : window_radius(q));
      fill(acc, 0, i);
    }
  }
  return out;
}

EmpiricalMetrics estimate_an(const ScenarioParams& p, Metric m, const RunOptions& o) {
  return estimate_an_grid(p, Axis::kEveIntensity, {p.eve_intensity}, {m}, o)[0][0];
}

std::vector<EmpiricalMetrics> estimate_microwave_grid(const MicrowaveParams& mw,
                                                      const std::vector<double>& eve_grid,
                                                      const RunOptions& o) {
  mw.validate();
  if (eve_grid.empty()) throw ValidationError("empty grid");
  double lmax = 0.0;
  for (double l : eve_grid) {
    if (l < 0.0) throw ValidationError("eavesdropper intensity must be non-negative");
    lmax = std::max(lmax, l);
  }
  std::vector<GridPoint> gp;
  for (double l : eve_grid) gp.push_back({lmax > 0.0 ? l / lmax : 1.0, mw.tc, mw.te, mw.power_split});
  // No noise floor to bound the window; 2 km keeps the truncated far field a
  // few percent of the mean interference at 8e-4 BS/m^2.
  const double w = o.window > 0.0 ? o.window : 2000.0;
  const AnAcc acc = run_an(microwave_model(mw), lmax, gp, o, w);
  std::vector<EmpiricalMetrics> out;
  for (std::size_t i = 0; i < gp.size(); ++i)
    out.push_back(an_metric(acc, i, Metric::kMicrowaveNp, mw.bs_intensity, o));
  return out;
}

EmpiricalMetrics estimate_microwave_baseline(const MicrowaveParams& mw, const RunOptions& o) {
  return estimate_microwave_grid(mw, {mw.eve_intensity}, o)[0];
}

std::vector<MeanEstimate> estimate_colluding_laplace(const ScenarioParams& p,
                                                     const std::vector<double>& s,
                                                     const RunOptions& o) {
  p.validate();
  const Links links(p);
  const SectorPmf pmf = sector_pmf(p);
  const double w = o.window > 0.0 ? o.window : window_radius(p);
  const MeanAcc acc = run_blocks(o, MeanAcc(s.size()), [&](MeanAcc& a, Rng& rng) {
    double total = 0.0;
    for_each_eve(p, links, pmf, w, rng, [&](double e) { total += e; });
    for (std::size_t i = 0; i < s.size(); ++i) a.add(i, std::exp(-s[i] * total));
  });
  return acc.finish(o.trials);
}

std::vector<MeanEstimate> estimate_an_laplace(const ScenarioParams& p, const std::vector<double>& s,
                                              const RunOptions& o) {
  p.validate();
  const AnModel m = an_model(p);
  const double w = o.window > 0.0 ? o.window : window_radius(p);
  const MeanAcc acc = run_blocks(o, MeanAcc(s.size()), [&](MeanAcc& a, Rng& rng) {
    // Receiver at the origin; each BS points its information sector at a
    // uniform direction.
    double field = 0.0;
    const long long nb = poisson(rng, m.bs_intensity * pi * w * w);
    for (long long i = 0; i < nb; ++i) {
      const double r = disc_radius(rng, w);
      const double th = 2.0 * pi * uniform(rng);
      const double ori = 2.0 * pi * uniform(rng);
      const LinkModel& lk = m.links.draw(rng, r * r);
      const double g = gamma_int(rng, lk.shape);
      // bearing from the BS to the origin is th + pi
      if (angle_gap(ori, th + pi) <= m.half_width) continue;
      field += m.an_gain * path_gain(lk, r * r) * g;
    }
    for (std::size_t i = 0; i < s.size(); ++i) a.add(i, std::exp(-s[i] * field));
  });
  return acc.finish(o.trials);
}

std::vector<MeanEstimate> estimate_plpf_counts(const ScenarioParams& p, const std::vector<double>& t,
                                               const RunOptions& o) {
  p.validate();
  const Links links(p);
  const SectorPmf pmf = sector_pmf(p);
  const double w = o.window > 0.0 ? o.window : window_radius(p);
  const MeanAcc acc = run_blocks(o, MeanAcc(t.size()), [&](MeanAcc& a, Rng& rng) {
    std::vector<double> counts(t.size(), 0.0);
    for_each_eve(p, links, pmf, w, rng, [&](double e) {
      for (std::size_t i = 0; i < t.size(); ++i)
        if (1.0 <= t[i] * e) counts[i] += 1.0;
    });
    for (std::size_t i = 0; i < t.size(); ++i) a.add(i, counts[i]);
  });
  return acc.finish(o.trials);
}

namespace {

struct DistAcc {
  DistanceSamples d;
  void merge(const DistAcc& o) {
    const auto app = [](std::vector<double>& a, const std::vector<double>& b) {
      a.insert(a.end(), b.begin(), b.end());
    };
    app(d.nearest_los, o.d.nearest_los);
    app(d.nearest_nlos, o.d.nearest_nlos);
    app(d.serving_los, o.d.serving_los);
    app(d.serving_nlos, o.d.serving_nlos);
  }
};

}  // namespace

DistanceSamples sample_distances(const ScenarioParams& p, const RunOptions& o) {
  p.validate();
  const Links links(p);
  const double w = o.window > 0.0 ? o.window : window_radius(p);
  DistAcc acc = run_blocks(o, DistAcc{}, [&](DistAcc& a, Rng& rng) {
    const long long nb = poisson(rng, p.bs_intensity * pi * w * w);
    double los = kInf, nlos = kInf;
    for (long long i = 0; i < nb; ++i) {
      const double r = disc_radius(rng, w);
      const LinkModel& lk = links.draw(rng, r * r);
      if (&lk == &links.los) los = std::min(los, r);
      else nlos = std::min(nlos, r);
    }
    if (los < kInf) a.d.nearest_los.push_back(los);
    if (nlos < kInf) a.d.nearest_nlos.push_back(nlos);
    const double gl = los < kInf ? path_gain(links.los, los * los) : 0.0;
    const double gn = nlos < kInf ? path_gain(links.nlos, nlos * nlos) : 0.0;
    if (gl > 0.0 && gl >= gn) a.d.serving_los.push_back(los);
    else if (gn > 0.0) a.d.serving_nlos.push_back(nlos);
  });
  acc.d.trials = o.trials;
  return acc.d;
}

}  // namespace mmsec::mc
