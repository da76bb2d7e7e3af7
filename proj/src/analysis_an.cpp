#include "mmsec/analysis_an.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "mmsec/analysis_noise.hpp"
#include "mmsec/numerics.hpp"

namespace mmsec::analysis {

namespace nm = mmsec::numerics;
using std::numbers::pi;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

nm::QuadratureSettings quad(double rel_tol, double scale) {
  nm::QuadratureSettings s;
  s.rel_tol = rel_tol;
  s.abs_tol = 1e-13;
  s.max_subdivisions = 4000;
  s.semi_infinite_scale = scale;
  return s;
}

struct InterfererClass {
  double gain;
  double power_fraction;
  double probability;
};

std::array<InterfererClass, 2> classes(const AnPattern& a) {
  return {InterfererClass{a.info_gain, a.power_split, a.info_probability()},
          InterfererClass{a.an_gain, 1.0 - a.power_split, a.an_probability()}};
}

}  // namespace

double an_interferer_factor(const ScenarioParams& p, LinkState interferer, double weight,
                            double lo, double hi, double class_intensity, double s_power) {
  if (weight <= 0.0 || class_intensity <= 0.0 || s_power <= 0.0 || !(hi > lo)) return 1.0;
  const LinkModel lk = p.link(interferer);
  const double k = s_power * lk.intercept;
  // 1 - (1 + k y^-alpha)^-N, written to keep precision when the term is small.
  const auto f = [&](double y) {
    if (y <= 0.0) return 0.0;
    const double x = k * std::pow(y, -lk.alpha);
    return -std::expm1(-lk.shape * std::log1p(x)) * y;
  };
  const double scale = std::max({lo, std::pow(k, 1.0 / lk.alpha), 1.0});
  const double integral = nm::integrate_checked(f, lo, hi, quad(1e-9, scale));
  return std::exp(-2.0 * pi * weight * class_intensity * integral);
}

double an_connection_probability(const ScenarioParams& p, GammaCdfConstant form) {
  const AnPattern& ant = p.an();
  if (ant.power_split <= 0.0 || p.bs_intensity <= 0.0) return 0.0;
  const double c = p.blockage.los_fraction;
  const double d = p.blockage.los_radius;
  const double n0 = p.noise();
  const auto cls = classes(ant);

  double total = 0.0;
  for (LinkState st : {LinkState::kLos, LinkState::kNlos}) {
    const LinkModel lk = p.link(st);
    const double a = gamma_cdf_constant(lk.shape, form);
    const auto f = [&](double r) {
      const double ra = std::pow(r, lk.alpha);
      // Interferer exclusion zones implied by minimum path-loss association.
      const double rho = dominance_radius(p, st, r);
      double los_lo, nlos_in_lo, nlos_out_lo;
      if (st == LinkState::kLos) {
        los_lo = r;
        nlos_in_lo = std::min(rho, d);
        nlos_out_lo = std::max(rho, d);
      } else {
        los_lo = std::min(rho, d);
        nlos_in_lo = std::min(r, d);
        nlos_out_lo = std::max(r, d);
      }
      double acc = 0.0;
      for (int n = 1; n <= lk.shape; ++n) {
        const double theta = p.tc * n * a / (ant.power_split * p.tx_power * ant.info_gain * lk.intercept);
        const double s = theta * ra;
        double term = std::exp(-s * n0);
        for (const auto& cl : cls) {
          const double lam = p.bs_intensity * cl.probability;
          const double sp = s * cl.gain * cl.power_fraction * p.tx_power;
          term *= an_interferer_factor(p, LinkState::kLos, c, los_lo, d, lam, sp);
          term *= an_interferer_factor(p, LinkState::kNlos, 1.0 - c, nlos_in_lo, d, lam, sp);
          term *= an_interferer_factor(p, LinkState::kNlos, 1.0, nlos_out_lo, kInf, lam, sp);
        }
        acc += ((n % 2 == 1) ? 1.0 : -1.0) * nm::binomial(lk.shape, n) * term;
      }
      return acc;
    };
    total += detail::integrate_serving(p, st, f, 1e-7);
  }
  return std::clamp(total, 0.0, 1.0);
}

double an_psi(const ScenarioParams& p, double s) {
  const AnPattern& ant = p.an();
  return detail::shot_noise_exponent(p, p.bs_intensity * ant.an_probability(), ant.an_gain, s);
}

double an_secrecy_probability(const ScenarioParams& p) {
  const AnPattern& ant = p.an();
  if (ant.power_split <= 0.0 || p.eve_intensity <= 0.0) return 1.0;
  if (p.te <= 0.0) return 0.0;
  const double phi = ant.power_split;
  const double n0 = p.noise();
  const double c = p.blockage.los_fraction;
  const double d = p.blockage.los_radius;

  // Upper bound on Pr(SINR_z > T_e) for an in-sector eavesdropper at r.
  const auto omega = [&](LinkState st) {
    const LinkModel lk = p.link(st);
    const double a = gamma_cdf_constant(lk.shape, GammaCdfConstant::kFactorial);
    return [&p, &ant, lk, a, phi, n0](double r) {
      const double base = a * p.te * std::pow(r, lk.alpha) / (phi * ant.info_gain * lk.intercept);
      double acc = 0.0;
      for (int n = 1; n <= lk.shape; ++n) {
        const double noise_term = std::exp(-n * base * n0 / p.tx_power);
        const double an_term = std::exp(an_psi(p, (1.0 - phi) * n * base));
        acc += ((n % 2 == 1) ? 1.0 : -1.0) * nm::binomial(lk.shape, n) * noise_term * an_term;
      }
      return acc * r;
    };
  };
  const auto om_l = omega(LinkState::kLos);
  const auto om_n = omega(LinkState::kNlos);
  const double lam = p.eve_intensity * ant.info_probability();
  const double scale = std::max(d, 1.0);
  double exponent = 0.0;
  if (c > 0.0) exponent += c * nm::integrate_checked(om_l, 0.0, d, quad(1e-9, scale));
  exponent += (1.0 - c) * nm::integrate_checked(om_n, 0.0, d, quad(1e-9, scale));
  exponent += nm::integrate_checked(om_n, d, kInf, quad(1e-9, scale));
  return std::clamp(std::exp(-2.0 * pi * lam * exponent), 0.0, 1.0);
}

double an_perfect_link_density(const ScenarioParams& p) {
  return p.bs_intensity * an_connection_probability(p) * an_secrecy_probability(p);
}

}  // namespace mmsec::analysis
