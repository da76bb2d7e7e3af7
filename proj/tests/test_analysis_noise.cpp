#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "mmsec/analysis_noise.hpp"
#include "mmsec/numerics.hpp"
#include "mmsec/scenario.hpp"

using namespace mmsec;
using namespace mmsec::analysis;
using std::numbers::pi;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Piecewise quadrature over a geometric ladder of cuts, so kinks anywhere in
// [lo, hi] land near a panel edge. Deliberately unaware of where the kinks are.
double ladder(const std::function<double(double)>& f, double lo, double hi, double scale) {
  numerics::QuadratureSettings s;
  s.rel_tol = 1e-12;
  s.abs_tol = 1e-15;
  s.max_subdivisions = 20000;
  s.semi_infinite_scale = scale;
  double total = 0.0;
  double a = lo;
  for (double b = std::max(lo, 1.0); b < std::min(hi, 1e6); b *= 1.25) {
    if (b <= a) continue;
    total += numerics::integrate(f, a, b, s).value;
    a = b;
  }
  total += numerics::integrate(f, a, hi, s).value;
  return total;
}

ScenarioParams random_scenario(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ScenarioParams p;
  p.blockage.los_fraction = 0.02 + 0.96 * u(rng);
  p.blockage.los_radius = 50.0 + 350.0 * u(rng);
  p.bs_intensity = std::pow(10.0, -5.0 + 2.0 * u(rng));
  p.eve_intensity = std::pow(10.0, -5.0 + 2.0 * u(rng));
  p.pathloss.alpha_los = 1.8 + 0.4 * u(rng);
  p.pathloss.alpha_nlos = 2.5 + 1.0 * u(rng);
  p.pathloss.beta_los_db = 55.0 + 10.0 * u(rng);
  p.pathloss.beta_nlos_db = p.pathloss.beta_los_db + 1.0 + 15.0 * u(rng);
  p.fading.nakagami_los = 1 + static_cast<int>(3 * u(rng));
  p.fading.nakagami_nlos = 1 + static_cast<int>(3 * u(rng));
  AntennaPattern a;
  a.beamwidth_deg = 5.0 + 55.0 * u(rng);
  a.main_gain = db_to_linear(5.0 + 15.0 * u(rng));
  a.side_gain = db_to_linear(-10.0 + 7.0 * u(rng));
  p.antenna = a;
  p.tc = db_to_linear(-10.0 + 30.0 * u(rng));
  p.te = db_to_linear(-10.0 + 40.0 * u(rng));
  p.validate();
  return p;
}

ScenarioParams fig1(double lb = 5e-4, double le = 1e-4) {
  ScenarioParams p = preset("fig1");
  p.bs_intensity = lb;
  p.eve_intensity = le;
  return p;
}

// Mean number of eavesdropper PLPF points <= t, straight from the definition:
// a point at distance r with gain v and fading g lands below t when
// g >= r^alpha / (v C t).
double plpf_oracle(const ScenarioParams& p, double t) {
  const auto& a = p.sectored();
  double total = 0.0;
  for (auto [v, pr] : {std::pair{a.main_gain, a.main_probability()},
                       std::pair{a.side_gain, 1.0 - a.main_probability()}}) {
    const auto f = [&](double r) {
      double acc = 0.0;
      for (LinkState st : {LinkState::kLos, LinkState::kNlos}) {
        const LinkModel lk = p.link(st);
        double q = st == LinkState::kLos ? p.blockage.los_fraction : 1.0 - p.blockage.los_fraction;
        if (r > p.blockage.los_radius) q = st == LinkState::kLos ? 0.0 : 1.0;
        if (q == 0.0) continue;
        acc += q * numerics::regularized_upper_gamma(lk.shape, std::pow(r, lk.alpha) / (v * lk.intercept * t));
      }
      return 2.0 * pi * r * acc;
    };
    total += pr * (ladder(f, 0.0, p.blockage.los_radius, 1.0) +
                   ladder(f, p.blockage.los_radius, kInf, p.blockage.los_radius));
  }
  return p.eve_intensity * total;
}

// log E exp(-s sum_z G L g) by direct radial quadrature of the PGFL.
double exponent_oracle(const ScenarioParams& p, double s) {
  const auto& a = p.sectored();
  double total = 0.0;
  for (auto [v, pr] : {std::pair{a.main_gain, a.main_probability()},
                       std::pair{a.side_gain, 1.0 - a.main_probability()}}) {
    const auto f = [&](double r) {
      double acc = 0.0;
      for (LinkState st : {LinkState::kLos, LinkState::kNlos}) {
        const LinkModel lk = p.link(st);
        double q = st == LinkState::kLos ? p.blockage.los_fraction : 1.0 - p.blockage.los_fraction;
        if (r > p.blockage.los_radius) q = st == LinkState::kLos ? 0.0 : 1.0;
        if (q == 0.0) continue;
        acc += q * -std::expm1(-lk.shape * std::log1p(s * v * lk.intercept * std::pow(r, -lk.alpha)));
      }
      return 2.0 * pi * r * acc;
    };
    total += pr * (ladder(f, 0.0, p.blockage.los_radius, 1.0) +
                   ladder(f, p.blockage.los_radius, kInf, p.blockage.los_radius));
  }
  return -p.eve_intensity * total;
}

}  // namespace

TEST_CASE("association probabilities sum to one and match the joint densities") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const ScenarioParams p = random_scenario(rng);
    const AssociationLaw law = association_probabilities(p);
    CHECK(law.a_los + law.a_nlos == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(law.a_los >= 0.0);
    CHECK(law.a_nlos >= 0.0);
    const double d = p.blockage.los_radius;
    const double scale = 1.0 / std::sqrt(pi * p.bs_intensity);
    const double jl = ladder([&](double r) { return serving_distance_joint(p, LinkState::kLos, r); }, 0.0, d, 1.0);
    // split at D: the NLOS density jumps there
    const auto fn = [&](double r) { return serving_distance_joint(p, LinkState::kNlos, r); };
    const double jn = ladder(fn, 0.0, d, 1.0) + ladder(fn, d, kInf, scale);
    CHECK(jl == doctest::Approx(law.a_los).epsilon(1e-7));
    CHECK(jl + jn == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("all four distance densities normalize") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 100; ++i) {
    const ScenarioParams p = random_scenario(rng);
    const double d = p.blockage.los_radius;
    const double scale = 1.0 / std::sqrt(pi * p.bs_intensity);
    CHECK(ladder([&](double r) { return nearest_los_pdf(p, r); }, 0.0, d, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(ladder([&](double r) { return nearest_nlos_pdf(p, r); }, 0.0, kInf, scale) ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(ladder([&](double r) { return serving_distance_pdf(p, LinkState::kLos, r); }, 0.0, d, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(ladder([&](double r) { return serving_distance_pdf(p, LinkState::kNlos, r); }, 0.0, kInf, scale) ==
          doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("distance density limits and support") {
  ScenarioParams p = fig1(2e-4);
  CHECK(nearest_los_pdf(p, -1.0) == 0.0);
  CHECK(nearest_los_pdf(p, p.blockage.los_radius + 1.0) == 0.0);
  // NLOS nearest density is continuous at D
  const double d = p.blockage.los_radius;
  CHECK(nearest_nlos_pdf(p, d * (1 - 1e-12)) / d == doctest::Approx(nearest_nlos_pdf(p, d * (1 + 1e-12)) / d / (1.0 / (1.0 - p.blockage.los_fraction))).epsilon(1e-6));

  // all-LOS wide ball: the plain nearest-neighbour law
  p.blockage = {1.0, 1e5};
  const double lb = p.bs_intensity;
  for (double r : {5.0, 20.0, 40.0, 80.0, 150.0}) {
    const double ref = 2.0 * pi * lb * r * std::exp(-pi * lb * r * r);
    CHECK(nearest_los_pdf(p, r) == doctest::Approx(ref).epsilon(1e-12));
  }
  CHECK(association_probabilities(p).a_nlos < 1e-12);

  ScenarioParams q = fig1(1e-12);
  CHECK(association_probabilities(q).a_nlos == doctest::Approx(1.0).epsilon(1e-6));
  q.blockage.los_fraction = 0.0;
  CHECK(association_probabilities(q).a_los == 0.0);
}

TEST_CASE("PLPF intensity matches the definition") {
  const ScenarioParams p = fig1();
  CHECK(plpf_intensity(p, 0.0) == 0.0);
  for (double t : {1e5, 1e6, 1e7, 1e8, 1e9}) {
    const double got = plpf_intensity(p, t);
    CHECK(got == doctest::Approx(plpf_oracle(p, t)).epsilon(1e-6));
    ScenarioParams q = p;
    q.eve_intensity *= 2.0;
    CHECK(plpf_intensity(q, t) == doctest::Approx(2.0 * got).epsilon(1e-12));
  }
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10; ++i) {
    const ScenarioParams r = random_scenario(rng);
    CHECK(plpf_intensity(r, 3e7) == doctest::Approx(plpf_oracle(r, 3e7)).epsilon(1e-6));
  }
}

TEST_CASE("colluding exponent closed form matches radial quadrature") {
  std::mt19937_64 rng(6);
  std::vector<ScenarioParams> cases = {fig1()};
  for (int i = 0; i < 8; ++i) cases.push_back(random_scenario(rng));
  for (const auto& p : cases) {
    for (double s : {1e3, 1e6, 1e8, 1e10, 1e12}) {
      const double ref = exponent_oracle(p, s);
      CHECK(colluding_exponent(p, s) == doctest::Approx(ref).epsilon(1e-7));
    }
  }
}

TEST_CASE("exponent derivatives agree with Richardson finite differences") {
  const ScenarioParams p = fig1();
  for (double s : {1e6, 1e8, 1e10}) {
    const auto xi = [&](double x) { return colluding_exponent(p, x); };
    const auto d1 = [&](double h) { return (xi(s + h) - xi(s - h)) / (2 * h); };
    const auto d2 = [&](double h) { return (xi(s + h) - 2 * xi(s) + xi(s - h)) / (h * h); };
    const double h = 0.02 * s;
    const double r1 = (4 * d1(h / 2) - d1(h)) / 3;
    const double r2 = (4 * d2(h / 2) - d2(h)) / 3;
    CHECK(colluding_exponent_derivative(p, 0, s) == doctest::Approx(xi(s)).epsilon(1e-7));
    CHECK(colluding_exponent_derivative(p, 1, s) == doctest::Approx(r1).epsilon(1e-5));
    CHECK(colluding_exponent_derivative(p, 2, s) == doctest::Approx(r2).epsilon(1e-4));
  }
  CHECK_THROWS_AS(colluding_exponent_derivative(p, 1, 0.0), numerics::DomainError);
}

TEST_CASE("colluding Laplace transform is completely monotone") {
  const ScenarioParams p = preset("fig2");
  CHECK(colluding_laplace(p, 0.0) == 1.0);
  double prev = 1.0;
  for (double s = 1e4; s < 1e13; s *= 4.0) {
    const double l0 = colluding_laplace_derivative(p, 0, s);
    const double l1 = colluding_laplace_derivative(p, 1, s);
    const double l2 = colluding_laplace_derivative(p, 2, s);
    CHECK(l0 > 0.0);
    CHECK(l0 <= 1.0);
    CHECK(l0 <= prev);
    CHECK(l1 <= 0.0);
    CHECK(l2 >= 0.0);
    prev = l0;
  }
  // order capped at max(N_L, N_N) - 1
  CHECK_THROWS(colluding_laplace_derivative(p, 3, 1e8));
}

TEST_CASE("limits of the noise-limited metrics") {
  ScenarioParams p = fig1();
  p.eve_intensity = 0.0;
  CHECK(secure_connectivity_noncolluding(p) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(secrecy_probability_noncolluding(p) == 1.0);
  CHECK(secure_connectivity_colluding_bound(p) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(secrecy_probability_colluding(p) == doctest::Approx(1.0).epsilon(1e-12));

  ScenarioParams q = preset("fig6");
  q.tc = 1e-12;
  CHECK(connection_probability(q) == doctest::Approx(1.0).epsilon(1e-6));
  q.tc = 1e12;
  CHECK(connection_probability(q) < 1e-9);
  q.te = 1e15;
  CHECK(secrecy_probability_noncolluding(q) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(secrecy_probability_colluding(q) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("monotonicity and ordering") {
  ScenarioParams p = fig1(2e-4);
  double prev_tau = 1.0, prev_sec = 1.0;
  for (double le : {1e-5, 5e-5, 1e-4, 2e-4, 4e-4}) {
    p.eve_intensity = le;
    const double tau = secure_connectivity_noncolluding(p);
    const double sec = secrecy_probability_noncolluding(p);
    CHECK(tau <= prev_tau + 1e-12);
    CHECK(sec <= prev_sec + 1e-12);
    prev_tau = tau;
    prev_sec = sec;
    ScenarioParams c = p;
    c.eavesdropper_mode = EavesdropperMode::kColluding;
    const double exact = secure_connectivity_colluding_exact(c);
    CHECK(exact <= tau + 1e-9);
    CHECK(secure_connectivity_colluding_bound(c) >= exact - 1e-9);
  }

  ScenarioParams g = fig1(2e-4);
  double prev = 0.0;
  for (double db : {5.0, 10.0, 15.0, 20.0, 25.0}) {
    g.sectored().main_gain = db_to_linear(db);
    const double tau = secure_connectivity_noncolluding(g);
    CHECK(tau >= prev - 1e-12);
    prev = tau;
  }

  ScenarioParams c = preset("fig6");
  double prev_con = 1.0;
  double prev_sec_c = 0.0;
  c.eavesdropper_mode = EavesdropperMode::kColluding;
  for (double db = -10.0; db <= 40.0; db += 5.0) {
    c.tc = db_to_linear(db);
    c.te = db_to_linear(db);
    const double con = connection_probability(c);
    const double sec = secrecy_probability_colluding(c);
    CHECK(con <= prev_con + 1e-12);
    CHECK(sec >= prev_sec_c - 1e-9);
    prev_con = con;
    prev_sec_c = sec;
  }
}

TEST_CASE("probabilities stay in the unit interval on random scenarios") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    ScenarioParams p = random_scenario(rng);
    for (double v : {connection_probability(p), secrecy_probability_noncolluding(p),
                     secrecy_probability_colluding(p)}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    if (i % 5 == 0) {
      const double tn = secure_connectivity_noncolluding(p);
      const double tb = secure_connectivity_colluding_bound(p);
      CHECK(tn >= 0.0);
      CHECK(tn <= 1.0);
      CHECK(tb >= 0.0);
      CHECK(tb <= 1.0);
    }
  }
}

TEST_CASE("Rayleigh fading collapses the colluding result to the Laplace transform") {
  ScenarioParams p = preset("fig2");
  p.fading = {1, 1};
  p.eve_intensity = 2e-4;
  double ref = 0.0;
  for (LinkState st : {LinkState::kLos, LinkState::kNlos}) {
    const LinkModel lk = p.link(st);
    ref += detail::integrate_serving(p, st, [&](double r) {
      return colluding_laplace(p, std::pow(r, lk.alpha) / (p.sectored().main_gain * lk.intercept));
    });
  }
  CHECK(secure_connectivity_colluding_exact(p) == doctest::Approx(ref).epsilon(1e-6));
  // with N = 1 the gamma CDF inequality is an equality
  CHECK(secure_connectivity_colluding_bound(p) == doctest::Approx(ref).epsilon(1e-6));
}

TEST_CASE("gamma CDF constant") {
  for (int n = 1; n <= 5; ++n) {
    const double k = gamma_cdf_constant(n, GammaCdfConstant::kFactorial);
    CHECK(k == doctest::Approx(std::pow(std::tgamma(n + 1.0), -1.0 / n)));
    // Pr(h <= x) >= (1 - e^{-k x})^N on a grid
    for (double x = 0.05; x < 20.0; x *= 1.3)
      CHECK(numerics::regularized_lower_gamma(n, x) >= std::pow(-std::expm1(-k * x), n) - 1e-12);
  }
  CHECK(gamma_cdf_constant(3, GammaCdfConstant::kShapeRoot) == doctest::Approx(std::pow(3.0, -1.0 / 3.0)));
}

TEST_CASE("perfect link density") {
  CHECK(perfect_link_density(2e-4, 0.8, 0.7).n_p == doctest::Approx(1.12e-4).epsilon(1e-12));
  CHECK(perfect_link_density(3e-4, 1.0, 1.0).n_p == 3e-4);
  CHECK(perfect_link_density(2e-4, 0.5, 0.5, 2.0).omega == doctest::Approx(1e-4));
  const ScenarioParams p = preset("fig6");
  const PerfectLinks pl = perfect_link_density(p);
  CHECK(pl.n_p == doctest::Approx(p.bs_intensity * connection_probability(p) *
                                  secrecy_probability_noncolluding(p)));
}
