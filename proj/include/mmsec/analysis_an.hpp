#pragma once

#include "mmsec/analysis_noise.hpp"
#include "mmsec/scenario.hpp"

namespace mmsec::analysis {

/// Upper bound on Pr(SINR_U >= T_c) with AN sectoring and full inter-cell
/// interference. Requires an AN antenna.
double an_connection_probability(const ScenarioParams& p,
                                  GammaCdfConstant form = GammaCdfConstant::kFactorial);

/// log E exp(-s I_A) for the AN field seen by an eavesdropper, normalised by
/// the AN transmit power (1 - phi) P_t.
double an_psi(const ScenarioParams& p, double s);

/// Lower bound on the probability that no in-sector eavesdropper reaches
/// SINR above T_e. Non-colluding eavesdroppers only.
double an_secrecy_probability(const ScenarioParams& p);

double an_perfect_link_density(const ScenarioParams& p);

/// Mean Laplace factor exp(-2 pi z lambda Pr int_v^y F(t) t dt) for one
/// interferer class, exposed for testing.
double an_interferer_factor(const ScenarioParams& p, LinkState interferer, double weight,
                            double lo, double hi, double class_intensity, double s_power);

}  // namespace mmsec::analysis
