#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "doctest.h"
#include "mmsec/analysis_an.hpp"
#include "mmsec/numerics.hpp"
#include "mmsec/scenario.hpp"

using namespace mmsec;
using namespace mmsec::analysis;
using std::numbers::pi;

namespace {

ScenarioParams random_an(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ScenarioParams p = preset("fig5");
  p.blockage.los_fraction = 0.02 + 0.96 * u(rng);
  p.blockage.los_radius = 50.0 + 300.0 * u(rng);
  p.bs_intensity = std::pow(10.0, -5.0 + 2.5 * u(rng));
  p.eve_intensity = std::pow(10.0, -5.0 + 2.5 * u(rng));
  p.fading.nakagami_los = 1 + static_cast<int>(3 * u(rng));
  p.fading.nakagami_nlos = 1 + static_cast<int>(3 * u(rng));
  AnPattern& a = p.an();
  a.beamwidth_deg = 5.0 + 85.0 * u(rng);
  a.info_gain = db_to_linear(5.0 + 15.0 * u(rng));
  a.an_gain = db_to_linear(-3.0 + 9.0 * u(rng));
  a.power_split = 0.05 + 0.9 * u(rng);
  p.tc = db_to_linear(-10.0 + 30.0 * u(rng));
  p.te = db_to_linear(-10.0 + 40.0 * u(rng));
  p.validate();
  return p;
}

// PGFL of the AN field by direct radial quadrature, per unit AN power.
double psi_oracle(const ScenarioParams& p, double s) {
  const AnPattern& a = p.an();
  numerics::QuadratureSettings q;
  q.rel_tol = 1e-11;
  q.abs_tol = 1e-14;
  q.max_subdivisions = 10000;
  const auto f = [&](double r) {
    double acc = 0.0;
    for (LinkState st : {LinkState::kLos, LinkState::kNlos}) {
      const LinkModel lk = p.link(st);
      double w = st == LinkState::kLos ? p.blockage.los_fraction : 1.0 - p.blockage.los_fraction;
      if (r > p.blockage.los_radius) w = st == LinkState::kLos ? 0.0 : 1.0;
      if (w > 0.0)
        acc += w * -std::expm1(-lk.shape * std::log1p(s * a.an_gain * lk.intercept * std::pow(r, -lk.alpha)));
    }
    return 2.0 * pi * r * acc;
  };
  const double d = p.blockage.los_radius;
  double total = 0.0;
  for (double lo = 0.0, hi = 1.0; lo < d; lo = hi, hi = std::min(d, hi * 2.0))
    total += numerics::integrate(f, lo, hi, q).value;
  q.semi_infinite_scale = d;
  total += numerics::integrate(f, d, std::numeric_limits<double>::infinity(), q).value;
  return -p.bs_intensity * a.an_probability() * total;
}

}  // namespace

TEST_CASE("AN psi") {
  const ScenarioParams p = preset("fig5");
  CHECK(an_psi(p, 0.0) == 0.0);
  double prev = 1.0;
  for (double s = 1e4; s < 1e14; s *= 10.0) {
    const double v = std::exp(an_psi(p, s));
    CHECK(v <= prev);
    CHECK(v > 0.0);
    prev = v;
    CHECK(an_psi(p, s) == doctest::Approx(psi_oracle(p, s)).epsilon(1e-7));
  }
}

TEST_CASE("interferer-free limit reduces to the noise-limited bound with phi P_t") {
  ScenarioParams p = preset("fig4");
  p.bs_intensity = 1e-8;
  const AnPattern& a = p.an();
  double ref = 0.0;
  for (LinkState st : {LinkState::kLos, LinkState::kNlos}) {
    const LinkModel lk = p.link(st);
    const double k = gamma_cdf_constant(lk.shape, GammaCdfConstant::kFactorial);
    ref += detail::integrate_serving(p, st, [&](double r) {
      const double x = k * p.tc * p.noise() * std::pow(r, lk.alpha) /
                       (a.power_split * p.tx_power * a.info_gain * lk.intercept);
      double acc = 0.0;
      for (int n = 1; n <= lk.shape; ++n)
        acc += ((n % 2) ? 1.0 : -1.0) * numerics::binomial(lk.shape, n) * std::exp(-n * x);
      return acc;
    });
  }
  CHECK(an_connection_probability(p) == doctest::Approx(ref).epsilon(1e-3));

  // and it bounds the exact noise-limited value at the same power
  ScenarioParams q = p;
  q.tx_power *= a.power_split;
  q.antenna = AntennaPattern{a.info_gain, 0.0, a.beamwidth_deg};
  CHECK(an_connection_probability(p) >= connection_probability(q) - 1e-6);
}

TEST_CASE("AN power split edge cases") {
  ScenarioParams p = preset("fig5");
  p.an().power_split = 1.0;
  const double con = an_connection_probability(p);
  const double sec = an_secrecy_probability(p);
  // zero AN power: the AN gain is irrelevant
  p.an().an_gain = db_to_linear(10.0);
  CHECK(an_connection_probability(p) == doctest::Approx(con).epsilon(1e-9));
  CHECK(an_secrecy_probability(p) == doctest::Approx(sec).epsilon(1e-12));

  p.an().power_split = 0.0;
  CHECK(an_connection_probability(p) == 0.0);
  CHECK(an_perfect_link_density(p) == 0.0);

  ScenarioParams q = preset("fig7");
  q.eve_intensity = 0.0;
  q.an().power_split = 1.0;
  CHECK(an_secrecy_probability(q) == 1.0);
  CHECK(an_perfect_link_density(q) == doctest::Approx(q.bs_intensity * an_connection_probability(q)));
}

TEST_CASE("AN limits in the eavesdropper threshold") {
  ScenarioParams p = preset("fig5");
  p.te = 1e15;
  CHECK(an_secrecy_probability(p) == doctest::Approx(1.0).epsilon(1e-9));
  p.eve_intensity = 1e-12;
  p.te = 1.0;
  CHECK(an_secrecy_probability(p) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("AN monotonicity") {
  ScenarioParams p = preset("fig5");
  double prev = 1.0;
  for (double le : {1e-5, 1e-4, 5e-4, 1e-3, 3e-3}) {
    p.eve_intensity = le;
    const double v = an_secrecy_probability(p);
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
  prev = 0.0;
  for (double db = -10.0; db <= 30.0; db += 5.0) {
    p.te = db_to_linear(db);
    const double v = an_secrecy_probability(p);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
  ScenarioParams c = preset("fig4");
  prev = 1.0;
  for (double db = -10.0; db <= 20.0; db += 5.0) {
    c.tc = db_to_linear(db);
    const double v = an_connection_probability(c);
    CHECK(v <= prev + 1e-9);
    prev = v;
  }
}

TEST_CASE("AN probabilities lie in the unit interval on random scenarios") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 100; ++i) {
    const ScenarioParams p = random_an(rng);
    const double con = an_connection_probability(p);
    const double sec = an_secrecy_probability(p);
    CHECK(con >= 0.0);
    CHECK(con <= 1.0);
    CHECK(sec >= 0.0);
    CHECK(sec <= 1.0);
  }
}

TEST_CASE("larger BS intensity can lower the AN connection probability") {
  const FigurePreset f = figure_preset("fig4");
  REQUIRE(f.curves.size() == 2);
  int sign_changes = 0;
  double last = 0.0;
  for (double db : f.grid) {
    const double lo = an_connection_probability(with_axis(f.curves[0].params, Axis::kTcDb, db));
    const double hi = an_connection_probability(with_axis(f.curves[1].params, Axis::kTcDb, db));
    const double diff = hi - lo;
    if (last != 0.0 && diff * last < 0.0) ++sign_changes;
    if (diff != 0.0) last = diff;
  }
  CHECK(sign_changes >= 1);
}

TEST_CASE("AN pattern is required") {
  CHECK_THROWS_AS(an_connection_probability(preset("fig1")), ValidationError);
  CHECK_THROWS_AS(an_secrecy_probability(preset("fig1")), ValidationError);
}
