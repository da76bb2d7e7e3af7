#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace mmsec::numerics {

/// Argument outside the domain of a special function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iterative method failed to reach its tolerance. Carries the best estimate.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double estimate, double error)
      : std::runtime_error(what), estimate_(estimate), error_(error) {}
  double estimate() const noexcept { return estimate_; }
  double error() const noexcept { return error_; }

 private:
  double estimate_;
  double error_;
};

class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double gamma_fn(double x);
double log_gamma(double x);
double digamma(double x);

/// gamma(s, x) = int_0^x t^{s-1} e^{-t} dt.
double lower_incomplete_gamma(double s, double x);
/// Gamma(s, x) = int_x^inf t^{s-1} e^{-t} dt.
double upper_incomplete_gamma(double s, double x);
/// Q(s, x) = Gamma(s, x) / Gamma(s).
double regularized_upper_gamma(double s, double x);
/// P(s, x) = gamma(s, x) / Gamma(s).
double regularized_lower_gamma(double s, double x);

/// Gauss hypergeometric 2F1(a, b; c; z) for real z < 1.
///
/// Uses the power series for |z| <= 1/2, the Pfaff transformation for z < 0
/// and the z -> 1 - z connection formulas otherwise (logarithmic variants when
/// c - a - b is an integer).
double gauss_2f1(double a, double b, double c, double z);

double binomial(int n, int k);

enum class SemiInfinitePolicy {
  /// x = lo + scale * u / (1 - u), u in [0, 1).
  kRationalMap,
  /// Integrate [lo, lo + scale * 2^k) panels until a panel adds less than the
  /// tolerance.
  kPanelTruncation,
};

struct QuadratureSettings {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  std::size_t max_subdivisions = 2000;
  SemiInfinitePolicy semi_infinite = SemiInfinitePolicy::kRationalMap;
  /// Length scale used by the semi-infinite policies.
  double semi_infinite_scale = 1.0;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t subdivisions = 0;
  bool converged = false;
};

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (7/15) quadrature with global bisection. `hi` may be
/// +infinity. Never throws on non-convergence; check `converged`.
QuadratureResult integrate(const Integrand& f, double lo, double hi,
                           const QuadratureSettings& settings = {});

/// As integrate(), but throws ConvergenceError when the tolerance is missed.
double integrate_checked(const Integrand& f, double lo, double hi,
                         const QuadratureSettings& settings = {});

/// k-th derivative of an exponent function Xi, k = 0 .. order.
using ExponentDerivative = std::function<double(int k, double s)>;

/// m-th derivative of exp(Xi(s)) from the derivatives of Xi via the
/// complete Bell polynomial recursion (Faa di Bruno for exp).
double laplace_derivative(const ExponentDerivative& xi, int order, double s,
                          int max_order);

}  // namespace mmsec::numerics
