#pragma once

#include <functional>
#include <vector>

#include "mmsec/scenario.hpp"

namespace mmsec::analysis {

struct AssociationLaw {
  double a_los = 0.0;
  double a_nlos = 1.0;
};

/// Density of the nearest LOS BS distance given at least one LOS BS in the
/// LOS ball. Zero outside [0, D].
double nearest_los_pdf(const ScenarioParams& p, double r);
/// Density of the nearest NLOS BS distance over [0, inf).
double nearest_nlos_pdf(const ScenarioParams& p, double r);

AssociationLaw association_probabilities(const ScenarioParams& p);

/// Density of the serving distance conditioned on the serving BS being in
/// state `s`. Zero when that state has zero probability.
double serving_distance_pdf(const ScenarioParams& p, LinkState s, double r);
/// A_s times the conditional density above. Well defined when A_s = 0.
double serving_distance_joint(const ScenarioParams& p, LinkState s, double r);

/// Radius within which a BS in state `other` beats a serving BS in state
/// `serving` at distance r under minimum path-loss association.
double dominance_radius(const ScenarioParams& p, LinkState serving, double r);

/// Mean number of path-loss-with-fading points in [0, t] seen from a BS with
/// the sectored pattern (Lambda_E(0, t)).
double plpf_intensity(const ScenarioParams& p, double t);

double secure_connectivity_noncolluding(const ScenarioParams& p);
double connection_probability(const ScenarioParams& p);

enum class SecrecyArgument {
  /// Threshold on 1 / (G g L) is P_t / (T_e N_0), matching the SNR definition.
  kWithPower,
  /// 1 / (T_e N_0), as printed; ignores the transmit power.
  kWithoutPower,
};
double secrecy_probability_noncolluding(const ScenarioParams& p,
                                        SecrecyArgument arg = SecrecyArgument::kWithPower);

/// Exponent Xi(s) of the Laplace transform of the colluding aggregate
/// I_E = sum_z G_b L g, in closed form through 2F1.
double colluding_exponent(const ScenarioParams& p, double s);
/// k-th derivative of Xi, k = 0..2, by quadrature of the Laplace-domain
/// representation of Xi.
double colluding_exponent_derivative(const ScenarioParams& p, int k, double s);
double colluding_laplace(const ScenarioParams& p, double s);
/// m-th derivative of the Laplace transform. Order is capped at
/// max(N_L, N_N) - 1.
double colluding_laplace_derivative(const ScenarioParams& p, int m, double s);

double secure_connectivity_colluding_exact(const ScenarioParams& p);

enum class GammaCdfConstant {
  /// kappa = (N!)^{-1/N}, the tight constant for a unit-scale gamma variable.
  kFactorial,
  /// N^{-1/N}.
  kShapeRoot,
};
/// kappa such that Pr(h <= x) >= (1 - exp(-kappa x))^N for h ~ gamma(N, 1).
double gamma_cdf_constant(int shape, GammaCdfConstant form);

double secure_connectivity_colluding_bound(
    const ScenarioParams& p, GammaCdfConstant form = GammaCdfConstant::kFactorial);

enum class SecrecyApproxForm {
  /// a = N (N!)^{-1/N}: w is gamma(N, 1/N) with unit mean.
  kUnitMeanGamma,
  /// a = (N!)^{-1/N}.
  kUnitScaleGamma,
  /// a = (N!)^{1/N}.
  kInverseFactorial,
};
struct SecrecyApproxOptions {
  int terms = 5;
  SecrecyApproxForm form = SecrecyApproxForm::kUnitMeanGamma;
  /// Binomial weights C(N, n) on the alternating sum.
  bool binomial_weights = true;
  /// Include P_t in the transform argument a n P_t / (N_0 T_e).
  bool include_power = true;
};
double secrecy_probability_colluding(const ScenarioParams& p, const SecrecyApproxOptions& o = {});

struct PerfectLinks {
  double n_p = 0.0;    // links / m^2
  double omega = 0.0;  // bits / s / Hz / m^2
};
PerfectLinks perfect_link_density(double bs_intensity, double p_con, double p_sec,
                                  double secrecy_rate_bits = 0.0);
/// Uses the scenario's eavesdropper mode to choose the secrecy probability.
PerfectLinks perfect_link_density(const ScenarioParams& p, double secrecy_rate_bits = 0.0);

// Helpers shared with the AN analysis.
namespace detail {

/// Probability that no NLOS BS lies within rho of the origin.
double nlos_void(const ScenarioParams& p, double rho);
/// Probability that no LOS BS lies within rho of the origin.
double los_void(const ScenarioParams& p, double rho);
/// Integrates f against A_s f_{r_s}(r) over the support of state s, split at
/// the density's kinks.
double integrate_serving(const ScenarioParams& p, LinkState s, const std::function<double(double)>& f,
                         double rel_tol = 1e-8);
/// log E exp(-s I) for I = sum gain * g * L over a PPP of the given intensity,
/// with LOS marks drawn from the ball around the receiver. Closed form via 2F1.
double shot_noise_exponent(const ScenarioParams& p, double intensity, double gain, double s);

}  // namespace detail

}  // namespace mmsec::analysis
