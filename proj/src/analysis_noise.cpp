#include "mmsec/analysis_noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mmsec/numerics.hpp"

namespace mmsec::analysis {

namespace nm = mmsec::numerics;
using std::numbers::pi;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

nm::QuadratureSettings settings(double rel_tol, double scale = 1.0) {
  nm::QuadratureSettings s;
  s.rel_tol = rel_tol;
  s.abs_tol = 1e-14;
  s.max_subdivisions = 4000;
  s.semi_infinite_scale = scale;
  return s;
}

// Integrates over [lo, hi] split at the given interior points.
double integrate_split(const std::function<double(double)>& f, double lo, double hi,
                       std::vector<double> cuts, const nm::QuadratureSettings& s) {
  cuts.erase(std::remove_if(cuts.begin(), cuts.end(),
                            [&](double c) { return !(c > lo && c < hi); }),
             cuts.end());
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  double a = lo;
  for (double c : cuts) {
    total += nm::integrate_checked(f, a, c, s);
    a = c;
  }
  total += nm::integrate_checked(f, a, hi, s);
  return total;
}

struct Geometry {
  double c;       // LOS fraction
  double d;       // LOS radius
  double lambda;  // BS intensity
  double cl, cn, al, an;
};

Geometry geometry(const ScenarioParams& p) {
  return {p.blockage.los_fraction, p.blockage.los_radius, p.bs_intensity,
          p.pathloss.c_los(),      p.pathloss.c_nlos(),   p.pathloss.alpha_los,
          p.pathloss.alpha_nlos};
}

// LOS serving distance beyond which no NLOS BS inside the ball can win.
double los_kink(const Geometry& g) { return std::pow(g.cl / g.cn, 1.0 / g.al) * std::pow(g.d, g.an / g.al); }
// NLOS serving distance at which the competing LOS radius reaches D.
double nlos_kink(const Geometry& g) { return std::pow(g.cn / g.cl, 1.0 / g.an) * std::pow(g.d, g.al / g.an); }

}  // namespace

namespace detail {

double nlos_void(const ScenarioParams& p, double rho) {
  const Geometry g = geometry(p);
  if (rho <= g.d) return std::exp(-pi * (1.0 - g.c) * g.lambda * rho * rho);
  return std::exp(-pi * (1.0 - g.c) * g.lambda * g.d * g.d - pi * g.lambda * (rho * rho - g.d * g.d));
}

double los_void(const ScenarioParams& p, double rho) {
  const Geometry g = geometry(p);
  const double m = std::min(rho, g.d);
  return std::exp(-pi * g.c * g.lambda * m * m);
}

double integrate_serving(const ScenarioParams& p, LinkState s, const std::function<double(double)>& f,
                         double rel_tol) {
  const Geometry g = geometry(p);
  if (g.lambda <= 0.0) return 0.0;
  const auto integrand = [&](double r) {
    const double w = serving_distance_joint(p, s, r);
    return w == 0.0 ? 0.0 : w * f(r);
  };
  if (s == LinkState::kLos) {
    if (g.c <= 0.0) return 0.0;
    return integrate_split(integrand, 0.0, g.d, {los_kink(g)}, settings(rel_tol));
  }
  const double hi = std::max(g.d, nlos_kink(g));
  const double head = integrate_split(integrand, 0.0, hi, {g.d, nlos_kink(g)}, settings(rel_tol));
  const double scale = std::max(1.0 / std::sqrt(pi * g.lambda), 0.1 * g.d);
  return head + nm::integrate_checked(integrand, hi, kInf, settings(rel_tol, scale));
}

namespace {

// int_lo^hi [1 - (1 + k y^-alpha)^-N] y dy by quadrature.
double shot_integral_quadrature(const LinkModel& lk, double k, double lo, double hi) {
  const auto f = [&](double y) {
    if (y <= 0.0) return 0.0;
    return -std::expm1(-lk.shape * std::log1p(k * std::pow(y, -lk.alpha))) * y;
  };
  return nm::integrate_checked(f, lo, hi, settings(1e-10, std::max(lo, 1.0)));
}

// int_0^D [1 - (1 + s v C y^-alpha)^-N] y dy.
double shot_integral_inside(const LinkModel& lk, double vc, double d, double s) {
  const double delta = 2.0 / lk.alpha;
  const double b = std::pow(d, lk.alpha) / vc;
  const double tail = s / (b + s);
  if (tail < 1e-12) return shot_integral_quadrature(lk, s * vc, 0.0, d);
  const double ratio = b / (b + s);
  double sum = 0.0;
  for (int m = 0; m < lk.shape; ++m) {
    // b^{m+delta} / (b+s)^{m+1}, arranged to avoid overflow.
    const double scale = std::pow(ratio, m + 1) * std::pow(b, delta - 1.0);
    sum += scale / (m + delta) * nm::gauss_2f1(1.0, m + 1.0, m + delta + 1.0, ratio);
  }
  return s * std::pow(vc, delta) / lk.alpha * sum;
}

// int_D^inf [1 - (1 + s v C y^-alpha)^-N] y dy; needs alpha > 2.
double shot_integral_outside(const LinkModel& lk, double vc, double d, double s) {
  const double delta = 2.0 / lk.alpha;
  const double b = std::pow(d, lk.alpha) / vc;
  if (s <= b) {
    const double ratio = b / (b + s);
    const double z = s / (b + s);
    double sum = 0.0;
    for (int m = 0; m < lk.shape; ++m) {
      const double scale = std::pow(ratio, m + 1) * std::pow(b, delta - 1.0);
      sum += scale / (1.0 - delta) * nm::gauss_2f1(1.0, m + 1.0, 2.0 - delta, z);
    }
    return s * std::pow(vc, delta) / lk.alpha * sum;
  }
  // Large s: whole-plane integral minus the disc, in u = y^alpha / (s v C).
  const double u0 = b / s;
  double sum = 0.0;
  double k_fact = 1.0;
  for (int k = 0; k < lk.shape; ++k) {
    if (k > 0) k_fact *= k;
    const double whole = nm::gamma_fn(k + delta) * nm::gamma_fn(1.0 - delta) / k_fact;
    const double head = std::pow(u0, k + delta) / (k + delta) *
                        nm::gauss_2f1(k + 1.0, k + delta, k + delta + 1.0, -u0);
    sum += whole - head;
  }
  return std::pow(s * vc, delta) / lk.alpha * sum;
}

}  // namespace

double shot_noise_exponent(const ScenarioParams& p, double intensity, double gain, double s) {
  if (s <= 0.0 || intensity <= 0.0) return 0.0;
  const double c = p.blockage.los_fraction;
  const double d = p.blockage.los_radius;
  const LinkModel los = p.link(LinkState::kLos);
  const LinkModel nlos = p.link(LinkState::kNlos);
  double total = 0.0;
  if (c > 0.0) total += c * shot_integral_inside(los, gain * los.intercept, d, s);
  if (c < 1.0) total += (1.0 - c) * shot_integral_inside(nlos, gain * nlos.intercept, d, s);
  total += shot_integral_outside(nlos, gain * nlos.intercept, d, s);
  return -2.0 * pi * intensity * total;
}

}  // namespace detail

double nearest_los_pdf(const ScenarioParams& p, double r) {
  const Geometry g = geometry(p);
  if (r < 0.0 || r > g.d) return 0.0;
  const double k = pi * g.c * g.lambda;
  if (k <= 0.0) return 2.0 * r / (g.d * g.d);  // sparse limit
  return 2.0 * k * r * std::exp(-k * r * r) / -std::expm1(-k * g.d * g.d);
}

double nearest_nlos_pdf(const ScenarioParams& p, double r) {
  const Geometry g = geometry(p);
  if (r < 0.0) return 0.0;
  if (r <= g.d) {
    const double k = pi * (1.0 - g.c) * g.lambda;
    return 2.0 * k * r * std::exp(-k * r * r);
  }
  return 2.0 * pi * g.lambda * r * std::exp(-pi * g.lambda * (r * r - g.d * g.d)) *
         std::exp(-pi * (1.0 - g.c) * g.lambda * g.d * g.d);
}

double dominance_radius(const ScenarioParams& p, LinkState serving, double r) {
  const Geometry g = geometry(p);
  if (serving == LinkState::kLos) return std::pow(g.cn / g.cl, 1.0 / g.an) * std::pow(r, g.al / g.an);
  return std::pow(g.cl / g.cn, 1.0 / g.al) * std::pow(r, g.an / g.al);
}

double serving_distance_joint(const ScenarioParams& p, LinkState s, double r) {
  const Geometry g = geometry(p);
  if (r < 0.0) return 0.0;
  if (s == LinkState::kLos) {
    if (r > g.d) return 0.0;
    const double k = pi * g.c * g.lambda;
    return 2.0 * k * r * std::exp(-k * r * r) * detail::nlos_void(p, dominance_radius(p, s, r));
  }
  return nearest_nlos_pdf(p, r) * detail::los_void(p, dominance_radius(p, s, r));
}

AssociationLaw association_probabilities(const ScenarioParams& p) {
  const Geometry g = geometry(p);
  AssociationLaw law;
  if (g.lambda <= 0.0 || g.c <= 0.0) return law;  // no LOS process at all
  // Weight of the NLOS competitor beating every LOS BS, over d_N <= mu, plus
  // the empty-ball event.
  const double mu = nlos_kink(g);
  const double empty = std::exp(-pi * g.c * g.lambda * g.d * g.d);
  const auto integrand = [&](double x) {
    const double rho = dominance_radius(p, LinkState::kNlos, x);
    return (std::exp(-pi * g.c * g.lambda * rho * rho) - empty) * nearest_nlos_pdf(p, x);
  };
  const double a_n = integrate_split(integrand, 0.0, mu, {g.d}, settings(1e-12)) + empty;
  law.a_nlos = a_n;
  law.a_los = 1.0 - a_n;
  return law;
}

double serving_distance_pdf(const ScenarioParams& p, LinkState s, double r) {
  const AssociationLaw law = association_probabilities(p);
  const double a = s == LinkState::kLos ? law.a_los : law.a_nlos;
  if (a <= 0.0) return 0.0;
  return serving_distance_joint(p, s, r) / a;
}

double plpf_intensity(const ScenarioParams& p, double t) {
  if (t <= 0.0 || p.eve_intensity <= 0.0) return 0.0;
  const AntennaPattern& ant = p.sectored();
  const double c = p.blockage.los_fraction;
  const double d = p.blockage.los_radius;
  double total = 0.0;
  for (const auto& [v, prob] : {std::pair{ant.main_gain, ant.main_probability()},
                               std::pair{ant.side_gain, 1.0 - ant.main_probability()}}) {
    if (prob <= 0.0) continue;
    for (LinkState st : {LinkState::kLos, LinkState::kNlos}) {
      const LinkModel lk = p.link(st);
      const double delta = 2.0 / lk.alpha;
      const double vct = v * lk.intercept * t;
      const double x = std::pow(d, lk.alpha) / vct;
      const double pre = prob * std::pow(vct, delta) / lk.alpha;
      double in = 0.0;
      double out = 0.0;
      double fact = 1.0;
      for (int m = 0; m < lk.shape; ++m) {
        if (m > 0) fact *= m;
        in += nm::lower_incomplete_gamma(m + delta, x) / fact;
        if (st == LinkState::kNlos) out += nm::upper_incomplete_gamma(m + delta, x) / fact;
      }
      const double q = st == LinkState::kLos ? c : 1.0 - c;
      total += pre * (q * in + out);
    }
  }
  return 2.0 * pi * p.eve_intensity * total;
}

double secure_connectivity_noncolluding(const ScenarioParams& p) {
  const double ms = p.sectored().main_gain;
  double tau = 0.0;
  for (LinkState st : {LinkState::kLos, LinkState::kNlos}) {
    const LinkModel lk = p.link(st);
    const double norm = std::tgamma(lk.shape);
    const auto inner = [&](double r) {
      const double base = std::pow(r, lk.alpha) / (ms * lk.intercept);
      const auto f = [&](double w) {
        if (w <= 0.0) return 0.0;
        return std::exp(-plpf_intensity(p, base / w) - w + (lk.shape - 1) * std::log(w)) / norm;
      };
      return nm::integrate_checked(f, 0.0, kInf, settings(1e-9, lk.shape));
    };
    tau += detail::integrate_serving(p, st, inner, 1e-8);
  }
  return std::clamp(tau, 0.0, 1.0);
}

double connection_probability(const ScenarioParams& p) {
  const double ms = p.uses_an() ? p.an().info_gain : p.sectored().main_gain;
  const double n0 = p.noise();
  double pc = 0.0;
  for (LinkState st : {LinkState::kLos, LinkState::kNlos}) {
    const LinkModel lk = p.link(st);
    const auto f = [&](double r) {
      const double x = n0 * p.tc * std::pow(r, lk.alpha) / (p.tx_power * ms * lk.intercept);
      return nm::regularized_upper_gamma(lk.shape, x);
    };
    pc += detail::integrate_serving(p, st, f, 1e-9);
  }
  return std::clamp(pc, 0.0, 1.0);
}

double secrecy_probability_noncolluding(const ScenarioParams& p, SecrecyArgument arg) {
  if (p.te <= 0.0) return p.eve_intensity > 0.0 ? 0.0 : 1.0;
  const double power = arg == SecrecyArgument::kWithPower ? p.tx_power : 1.0;
  return std::exp(-plpf_intensity(p, power / (p.te * p.noise())));
}

double colluding_exponent(const ScenarioParams& p, double s) {
  const AntennaPattern& ant = p.sectored();
  const double pm = ant.main_probability();
  return detail::shot_noise_exponent(p, p.eve_intensity * pm, ant.main_gain, s) +
         detail::shot_noise_exponent(p, p.eve_intensity * (1.0 - pm), ant.side_gain, s);
}

double colluding_exponent_derivative(const ScenarioParams& p, int k, double s) {
  if (k < 0) throw nm::DomainError("negative derivative order");
  if (!(s > 0.0)) throw nm::DomainError("derivative of the exponent needs s > 0");
  // Xi(s) = -int_0^inf Lambda(s / y) e^{-y} dy after z = y / s; differentiating
  // s e^{-s z} k times gives the polynomial weight below.
  const auto weight = [k](double y) {
    if (k == 0) return -1.0;
    return k * std::pow(y, k - 1) - std::pow(y, k);
  };
  const auto f = [&](double y) { return plpf_intensity(p, s / y) * weight(y) * std::exp(-y); };
  // y^{-2/alpha} singularity at the origin: y = u^4 smooths it.
  const auto head = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double y = u * u * u * u;
    return f(y) * 4.0 * u * u * u;
  };
  const nm::QuadratureSettings qs = settings(1e-10);
  const double integral = nm::integrate_checked(head, 0.0, 1.0, qs) +
                          nm::integrate_checked(f, 1.0, kInf, qs);
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return sign * std::pow(s, -k) * integral;
}

double colluding_laplace(const ScenarioParams& p, double s) {
  if (s <= 0.0) return 1.0;
  return std::exp(colluding_exponent(p, s));
}

double colluding_laplace_derivative(const ScenarioParams& p, int m, double s) {
  const int max_order = std::max(p.fading.nakagami_los, p.fading.nakagami_nlos) - 1;
  const nm::ExponentDerivative xi = [&p](int k, double x) {
    return k == 0 ? colluding_exponent(p, x) : colluding_exponent_derivative(p, k, x);
  };
  return nm::laplace_derivative(xi, m, s, max_order);
}

double secure_connectivity_colluding_exact(const ScenarioParams& p) {
  const double ms = p.sectored().main_gain;
  double tau = 0.0;
  for (LinkState st : {LinkState::kLos, LinkState::kNlos}) {
    const LinkModel lk = p.link(st);
    const auto f = [&](double r) {
      const double s = std::pow(r, lk.alpha) / (ms * lk.intercept);
      if (s <= 0.0) return 1.0;
      double acc = 0.0;
      double coef = 1.0;  // s^m / m! with the (-1)^m folded in
      for (int m = 0; m < lk.shape; ++m) {
        if (m > 0) coef *= -s / m;
        acc += coef * colluding_laplace_derivative(p, m, s);
      }
      return acc;
    };
    tau += detail::integrate_serving(p, st, f, 1e-7);
  }
  return std::clamp(tau, 0.0, 1.0);
}

double gamma_cdf_constant(int shape, GammaCdfConstant form) {
  if (form == GammaCdfConstant::kShapeRoot) return std::pow(shape, -1.0 / shape);
  return std::pow(std::tgamma(shape + 1.0), -1.0 / shape);
}

double secure_connectivity_colluding_bound(const ScenarioParams& p, GammaCdfConstant form) {
  const double ms = p.sectored().main_gain;
  double tau = 0.0;
  for (LinkState st : {LinkState::kLos, LinkState::kNlos}) {
    const LinkModel lk = p.link(st);
    const double a = gamma_cdf_constant(lk.shape, form);
    const auto f = [&](double r) {
      const double s = a * std::pow(r, lk.alpha) / (ms * lk.intercept);
      double acc = 0.0;
      for (int n = 1; n <= lk.shape; ++n) {
        const double sign = (n % 2 == 1) ? 1.0 : -1.0;
        acc += sign * nm::binomial(lk.shape, n) * colluding_laplace(p, n * s);
      }
      return acc;
    };
    tau += detail::integrate_serving(p, st, f, 1e-9);
  }
  return std::clamp(tau, 0.0, 1.0);
}

double secrecy_probability_colluding(const ScenarioParams& p, const SecrecyApproxOptions& o) {
  if (o.terms < 1) throw nm::DomainError("approximation needs at least one term");
  if (p.te <= 0.0) return p.eve_intensity > 0.0 ? 0.0 : 1.0;
  const int n_terms = o.terms;
  const double root = std::pow(std::tgamma(n_terms + 1.0), 1.0 / n_terms);
  double a = 0.0;
  switch (o.form) {
    case SecrecyApproxForm::kUnitMeanGamma: a = n_terms / root; break;
    case SecrecyApproxForm::kUnitScaleGamma: a = 1.0 / root; break;
    case SecrecyApproxForm::kInverseFactorial: a = root; break;
  }
  const double power = o.include_power ? p.tx_power : 1.0;
  const double base = a * power / (p.noise() * p.te);
  double acc = 0.0;
  for (int n = 1; n <= n_terms; ++n) {
    const double sign = (n % 2 == 1) ? 1.0 : -1.0;
    const double w = o.binomial_weights ? nm::binomial(n_terms, n) : 1.0;
    acc += sign * w * colluding_laplace(p, n * base);
  }
  return std::clamp(acc, 0.0, 1.0);
}

PerfectLinks perfect_link_density(double bs_intensity, double p_con, double p_sec,
                                  double secrecy_rate_bits) {
  PerfectLinks out;
  out.n_p = bs_intensity * p_con * p_sec;
  out.omega = out.n_p * secrecy_rate_bits;
  return out;
}

PerfectLinks perfect_link_density(const ScenarioParams& p, double secrecy_rate_bits) {
  const double pc = connection_probability(p);
  const double ps = p.eavesdropper_mode == EavesdropperMode::kColluding
                        ? secrecy_probability_colluding(p)
                        : secrecy_probability_noncolluding(p);
  return perfect_link_density(p.bs_intensity, pc, ps, secrecy_rate_bits);
}

}  // namespace mmsec::analysis
