#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mmsec/scenario.hpp"

namespace mmsec::mc {

using Rng = std::mt19937_64;

/// Counter-based substream seed: splitmix64 of (master, trial).
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t trial);

struct EmpiricalMetrics {
  double estimate = 0.0;
  /// 95% half-width. Wilson interval for probabilities, delta method for
  /// densities.
  double ci_halfwidth = 0.0;
  /// Standard error used for 3-sigma checks.
  double sigma = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  std::uint64_t seed = 0;
  /// Realizations with no BS in the window.
  std::uint64_t voids = 0;
};

EmpiricalMetrics wilson(std::uint64_t successes, std::uint64_t trials, std::uint64_t seed = 0);
/// lambda_B * p_con * p_sec with a delta-method interval.
EmpiricalMetrics density_product(double bs_intensity, const EmpiricalMetrics& con,
                                 const EmpiricalMetrics& sec);

/// Simulation window: max(5 D, radius where the NLOS path loss at P_t M_s is
/// 30 dB below the noise floor).
double window_radius(const ScenarioParams& p);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct BsPoint {
  Vec2 pos;
  double distance = 0.0;   // to the typical user at the origin
  bool los = false;        // link to the typical user
  double path_loss = 0.0;  // C_j d^-alpha_j towards the user
  double orientation = 0.0;  // boresight, radians; serving BS points at the user
};

struct EvePoint {
  Vec2 pos;
  double distance = 0.0;  // to the serving BS
  bool los = false;
  double gain = 0.0;      // G_b drawn i.i.d. from the sector PMF
  double fading = 0.0;    // g ~ gamma(N_j, 1)
};

struct NetworkRealization {
  std::vector<BsPoint> bs;
  std::vector<EvePoint> eves;
  int serving = -1;
  double serving_fading = 0.0;
  double window_radius = 0.0;

  bool is_void() const { return serving < 0; }
};

/// One PPP world around the typical user. BS window centred at the origin;
/// eavesdropper window of the same radius centred on the serving BS.
NetworkRealization sample_realization(const ScenarioParams& p, double window_radius, Rng& rng);

/// Where the AN secrecy event is evaluated.
enum class SecrecyFrame {
  /// A BS at the origin with a uniformly oriented information sector and an
  /// unconditioned field of other BSs (the typical transmitter).
  kTypicalTransmitter,
  /// The typical user's serving BS, sector pointed at the user. The other
  /// BSs then avoid the association exclusion zone around the user.
  kServingBs,
};

struct RunOptions {
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  /// 0 = MMSEC_THREADS environment variable, else hardware concurrency.
  unsigned threads = 0;
  /// 0 = window_radius(params).
  double window = 0.0;
  SecrecyFrame secrecy_frame = SecrecyFrame::kTypicalTransmitter;
};

unsigned resolve_threads(unsigned requested);

/// Noise-limited metrics (tau_n, tau_c, tau_c_bound, p_con, p_sec_n, p_sec_c,
/// n_p_n, n_p_c) for every grid point. Result is indexed [grid][metric].
/// Eavesdropper-intensity and threshold axes share one set of realizations.
std::vector<std::vector<EmpiricalMetrics>> estimate_noise_grid(const ScenarioParams& p, Axis axis,
                                                               const std::vector<double>& grid,
                                                               const std::vector<Metric>& metrics,
                                                               const RunOptions& o);
EmpiricalMetrics estimate_noise_limited(const ScenarioParams& p, Metric m, const RunOptions& o);

/// AN metrics (an_p_con, an_p_sec, an_n_p). Threshold, power-split and
/// eavesdropper-intensity axes share one set of realizations.
std::vector<std::vector<EmpiricalMetrics>> estimate_an_grid(const ScenarioParams& p, Axis axis,
                                                            const std::vector<double>& grid,
                                                            const std::vector<Metric>& metrics,
                                                            const RunOptions& o);
EmpiricalMetrics estimate_an(const ScenarioParams& p, Metric m, const RunOptions& o);

/// Microwave baseline perfect link density over an eavesdropper-intensity
/// grid (one entry per grid value).
std::vector<EmpiricalMetrics> estimate_microwave_grid(const MicrowaveParams& mw,
                                                      const std::vector<double>& eve_grid,
                                                      const RunOptions& o);
EmpiricalMetrics estimate_microwave_baseline(const MicrowaveParams& mw, const RunOptions& o);

// Oracles for individual analytical building blocks.

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// E exp(-s I_E) of the colluding aggregate around a BS, per s.
std::vector<MeanEstimate> estimate_colluding_laplace(const ScenarioParams& p,
                                                     const std::vector<double>& s,
                                                     const RunOptions& o);
/// E exp(-s I_A / ((1 - phi) P_t)) of the AN field at a fixed receiver, per s.
std::vector<MeanEstimate> estimate_an_laplace(const ScenarioParams& p, const std::vector<double>& s,
                                              const RunOptions& o);
/// Mean number of eavesdroppers with 1 / (G g L) <= t around a fixed BS.
std::vector<MeanEstimate> estimate_plpf_counts(const ScenarioParams& p, const std::vector<double>& t,
                                               const RunOptions& o);

struct DistanceSamples {
  std::vector<double> nearest_los;   // trials with at least one LOS BS
  std::vector<double> nearest_nlos;
  std::vector<double> serving_los;   // trials served by a LOS BS
  std::vector<double> serving_nlos;
  std::uint64_t trials = 0;
};
DistanceSamples sample_distances(const ScenarioParams& p, const RunOptions& o);

}  // namespace mmsec::mc
