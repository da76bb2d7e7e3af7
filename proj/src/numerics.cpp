#include "mmsec/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <vector>

namespace mmsec::numerics {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kPi = std::numbers::pi;

constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
constexpr double kLanczosG = 7.0;

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::round(x); }

// Gamma for any real argument that is not a pole.
double gamma_any(double x) {
  if (is_nonpositive_integer(x)) {
    throw DomainError("gamma: pole at non-positive integer");
  }
  if (x < 0.5) {
    return kPi / (std::sin(kPi * x) * gamma_any(1.0 - x));
  }
  const double xm = x - 1.0;
  double acc = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) {
    acc += kLanczos[i] / (xm + static_cast<double>(i));
  }
  const double t = xm + kLanczosG + 0.5;
  // Split the power to delay overflow for large arguments.
  const double half = std::pow(t, 0.5 * (xm + 0.5));
  return std::sqrt(2.0 * kPi) * half * (half * std::exp(-t)) * acc;
}

// 1 / Gamma(x); zero at the poles.
double rgamma(double x) {
  if (is_nonpositive_integer(x)) return 0.0;
  return 1.0 / gamma_any(x);
}

double incgamma_prefactor(double s, double x) {
  return std::exp(-x + s * std::log(x) - log_gamma(s));
}

// P(s, x) by power series, valid for x < s + 1.
double lower_series(double s, double x) {
  double ap = s;
  double del = 1.0 / s;
  double sum = del;
  for (int i = 0; i < 100000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) {
      return sum * incgamma_prefactor(s, x);
    }
  }
  throw ConvergenceError("incomplete gamma series did not converge", sum, del);
}

// Q(s, x) by modified Lentz continued fraction, valid for x >= s + 1.
double upper_fraction(double s, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) {
      return h * incgamma_prefactor(s, x);
    }
  }
  throw ConvergenceError("incomplete gamma continued fraction did not converge", h, 0.0);
}

void check_incgamma_args(double s, double x, const char* name) {
  if (!(s > 0.0) || !(x >= 0.0) || !std::isfinite(s)) {
    throw DomainError(std::string(name) + ": requires s > 0 and x >= 0");
  }
}

double hyp_series(double a, double b, double c, double z) {
  double term = 1.0;
  double sum = 1.0;
  int small_terms = 0;
  for (int k = 0; k < 50000; ++k) {
    term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    sum += term;
    if (term == 0.0) return sum;
    small_terms = std::abs(term) <= kEps * std::abs(sum) ? small_terms + 1 : 0;
    if (small_terms >= 2) return sum;
  }
  throw DomainError("gauss_2f1: series did not converge");
}

// Connection formula for integer m = c - a - b >= 0, with w = 1 - z in (0, 1/2].
double hyp_log_case(double a, double b, int m, double w) {
  const double c = a + b + m;
  double first = 0.0;
  if (m > 0) {
    double term = 1.0;
    double sum = 1.0;
    for (int n = 0; n < m - 1; ++n) {
      term *= (a + n) * (b + n) / ((n + 1.0) * (1.0 - m + n)) * w;
      sum += term;
    }
    first = gamma_any(m) * gamma_any(c) * rgamma(a + m) * rgamma(b + m) * sum;
  }
  const double log_w = std::log(w);
  double coeff = 1.0 / gamma_any(m + 1.0);
  double sum = 0.0;
  for (int n = 0; n < 50000; ++n) {
    const double bracket = log_w - digamma(n + 1.0) - digamma(n + m + 1.0) +
                           digamma(a + n + m) + digamma(b + n + m);
    const double term = coeff * bracket;
    sum += term;
    if (n > 2 && std::abs(coeff) * (std::abs(bracket) + 1.0) <= kEps * std::abs(sum)) break;
    coeff *= (a + m + n) * (b + m + n) / ((n + 1.0) * (n + m + 1.0)) * w;
    if (coeff == 0.0) break;
  }
  const double second = std::pow(-w, m) * gamma_any(c) * rgamma(a) * rgamma(b) * sum;
  return first - second;
}

double hyp_near_one(double a, double b, double c, double z) {
  const double w = 1.0 - z;
  const double d = c - a - b;
  const double m = std::round(d);
  if (std::abs(d - m) < 1e-9) {
    if (m >= 0) return hyp_log_case(a, b, static_cast<int>(m), w);
    // Euler: F(a,b;c;z) = w^{c-a-b} F(c-a, c-b; c; z).
    return std::pow(w, d) * hyp_log_case(c - a, c - b, static_cast<int>(-m), w);
  }
  const double gc = gamma_any(c);
  const double t1 = gc * gamma_any(d) * rgamma(c - a) * rgamma(c - b) *
                    hyp_series(a, b, 1.0 - d, w);
  const double t2 = std::pow(w, d) * gc * gamma_any(-d) * rgamma(a) * rgamma(b) *
                    hyp_series(c - a, c - b, 1.0 + d, w);
  return t1 + t2;
}

// 15-point Kronrod nodes (non-negative half) and weights; Gauss 7-point
// weights for the odd-indexed nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo;
  double hi;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gauss_kronrod(const Integrand& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double res_k = fc * kWgk[7];
  double res_g = fc * kWg[3];
  double res_abs = std::abs(res_k);
  std::array<double, 7> f1{};
  std::array<double, 7> f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    const double pair = f1[j] + f2[j];
    res_k += kWgk[j] * pair;
    res_abs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) res_g += kWg[j / 2] * pair;
  }
  const double mean = 0.5 * res_k;
  double res_asc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) {
    res_asc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  }
  const double scale = std::abs(half);
  res_asc *= scale;
  res_abs *= scale;
  double err = std::abs((res_k - res_g) * half);
  if (res_asc != 0.0 && err != 0.0) {
    err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
  }
  if (res_abs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * res_abs, err);
  }
  return {lo, hi, res_k * half, err};
}

QuadratureResult integrate_finite(const Integrand& f, double lo, double hi,
                                  const QuadratureSettings& s) {
  QuadratureResult out;
  if (lo == hi) {
    out.converged = true;
    return out;
  }
  std::priority_queue<Panel> heap;
  Panel first = gauss_kronrod(f, lo, hi);
  double total = first.value;
  double error = first.error;
  heap.push(first);
  std::size_t splits = 0;
  auto done = [&] { return error <= std::max(s.abs_tol, s.rel_tol * std::abs(total)); };
  while (!done() && splits < s.max_subdivisions) {
    if (!std::isfinite(total) || !std::isfinite(error)) break;
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (mid <= worst.lo || mid >= worst.hi) {
      // Panel cannot be split further in double precision.
      heap.push(worst);
      break;
    }
    Panel left = gauss_kronrod(f, worst.lo, mid);
    Panel right = gauss_kronrod(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++splits;
    if (splits % 64 == 0) {
      // Re-sum to shed accumulated cancellation error.
      std::vector<Panel> all;
      all.reserve(heap.size());
      total = 0.0;
      error = 0.0;
      while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
      }
      for (const Panel& p : all) {
        total += p.value;
        error += p.error;
        heap.push(p);
      }
    }
  }
  out.value = total;
  out.abs_error = error;
  out.subdivisions = splits;
  out.converged = std::isfinite(total) && done();
  return out;
}

}  // namespace

double gamma_fn(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("gamma_fn: requires x > 0");
  }
  return gamma_any(x);
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: requires x > 0");
  if (x < 0.5) {
    return std::log(kPi / std::sin(kPi * x)) - log_gamma(1.0 - x);
  }
  const double xm = x - 1.0;
  double acc = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) {
    acc += kLanczos[i] / (xm + static_cast<double>(i));
  }
  const double t = xm + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * kPi) + (xm + 0.5) * std::log(t) - t + std::log(acc);
}

double digamma(double x) {
  if (is_nonpositive_integer(x)) throw DomainError("digamma: pole");
  if (x < 0.0) {
    return digamma(1.0 - x) - kPi / std::tan(kPi * x);
  }
  double result = 0.0;
  while (x < 12.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double f = 1.0 / (x * x);
  const double tail =
      f * (1.0 / 12 - f * (1.0 / 120 - f * (1.0 / 252 - f * (1.0 / 240 - f * (1.0 / 132)))));
  return result + std::log(x) - 0.5 / x - tail;
}

double regularized_lower_gamma(double s, double x) {
  check_incgamma_args(s, x, "regularized_lower_gamma");
  if (x == 0.0) return 0.0;
  if (x < s + 1.0) return lower_series(s, x);
  return 1.0 - upper_fraction(s, x);
}

double regularized_upper_gamma(double s, double x) {
  check_incgamma_args(s, x, "regularized_upper_gamma");
  if (x == 0.0) return 1.0;
  if (x < s + 1.0) return 1.0 - lower_series(s, x);
  return upper_fraction(s, x);
}

double lower_incomplete_gamma(double s, double x) {
  check_incgamma_args(s, x, "lower_incomplete_gamma");
  if (x == 0.0) return 0.0;
  if (x < s + 1.0) {
    // Unnormalised series avoids the round trip through Gamma(s).
    return lower_series(s, x) * gamma_fn(s);
  }
  return gamma_fn(s) * (1.0 - upper_fraction(s, x));
}

double upper_incomplete_gamma(double s, double x) {
  check_incgamma_args(s, x, "upper_incomplete_gamma");
  if (x == 0.0) return gamma_fn(s);
  if (x < s + 1.0) return gamma_fn(s) * (1.0 - lower_series(s, x));
  return gamma_fn(s) * upper_fraction(s, x);
}

double gauss_2f1(double a, double b, double c, double z) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(z)) {
    throw DomainError("gauss_2f1: non-finite argument");
  }
  if (is_nonpositive_integer(c)) throw DomainError("gauss_2f1: c is a pole");
  if (!(z < 1.0)) throw DomainError("gauss_2f1: requires z < 1");
  if (z == 0.0) return 1.0;
  if (is_nonpositive_integer(a) || is_nonpositive_integer(b)) {
    return hyp_series(a, b, c, z);  // terminating polynomial
  }
  if (std::abs(z) <= 0.5) return hyp_series(a, b, c, z);
  if (z < 0.0) {
    // Pfaff: F(a,b;c;z) = (1-z)^{-a} F(a, c-b; c; z/(z-1)).
    return std::pow(1.0 - z, -a) * gauss_2f1(a, c - b, c, z / (z - 1.0));
  }
  return hyp_near_one(a, b, c, z);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double out = 1.0;
  for (int i = 1; i <= k; ++i) {
    out = out * (n - k + i) / i;
  }
  return out;
}

void QuadratureSettings::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || max_subdivisions < 16 ||
      !(semi_infinite_scale > 0.0)) {
    throw std::invalid_argument(
        "QuadratureSettings: need rel_tol > 0, abs_tol > 0, max_subdivisions >= 16");
  }
}

QuadratureResult integrate(const Integrand& f, double lo, double hi,
                           const QuadratureSettings& settings) {
  settings.validate();
  if (std::isnan(lo) || std::isnan(hi) || std::isinf(lo)) {
    throw DomainError("integrate: lower limit must be finite");
  }
  if (hi < lo) {
    QuadratureResult r = integrate(f, hi, lo, settings);
    r.value = -r.value;
    return r;
  }
  if (std::isfinite(hi)) return integrate_finite(f, lo, hi, settings);

  const double scale = settings.semi_infinite_scale;
  if (settings.semi_infinite == SemiInfinitePolicy::kRationalMap) {
    auto mapped = [&](double u) {
      if (u >= 1.0) return 0.0;
      const double one_minus = 1.0 - u;
      return f(lo + scale * u / one_minus) * scale / (one_minus * one_minus);
    };
    return integrate_finite(mapped, 0.0, 1.0, settings);
  }

  QuadratureResult out;
  double start = lo;
  double width = scale;
  int quiet_panels = 0;
  for (int k = 0; k < 80; ++k) {
    QuadratureResult panel = integrate_finite(f, start, start + width, settings);
    out.value += panel.value;
    out.abs_error += panel.abs_error;
    out.subdivisions += panel.subdivisions;
    if (!panel.converged) return out;
    const double tol = std::max(settings.abs_tol, settings.rel_tol * std::abs(out.value));
    quiet_panels = std::abs(panel.value) <= tol ? quiet_panels + 1 : 0;
    if (quiet_panels >= 2) {
      out.converged = true;
      return out;
    }
    start += width;
    width *= 2.0;
  }
  return out;
}

double integrate_checked(const Integrand& f, double lo, double hi,
                         const QuadratureSettings& settings) {
  const QuadratureResult r = integrate(f, lo, hi, settings);
  if (!r.converged) {
    throw ConvergenceError("integrate: tolerance not met (estimate " + std::to_string(r.value) +
                               ", error " + std::to_string(r.abs_error) + ")",
                           r.value, r.abs_error);
  }
  return r.value;
}

double laplace_derivative(const ExponentDerivative& xi, int order, double s, int max_order) {
  if (order < 0) throw std::invalid_argument("laplace_derivative: negative order");
  if (order > max_order) {
    throw UnsupportedError("laplace_derivative: order " + std::to_string(order) +
                           " exceeds supported maximum " + std::to_string(max_order));
  }
  std::vector<double> d(order + 1);
  for (int k = 1; k <= order; ++k) d[k] = xi(k, s);
  // Complete Bell polynomials: Y_{n+1} = sum_k C(n,k) d_{k+1} Y_{n-k}.
  std::vector<double> y(order + 1, 0.0);
  y[0] = 1.0;
  for (int n = 0; n < order; ++n) {
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) acc += binomial(n, k) * d[k + 1] * y[n - k];
    y[n + 1] = acc;
  }
  return std::exp(xi(0, s)) * y[order];
}

}  // namespace mmsec::numerics
