#pragma once

#include <cmath>
#include <functional>

#include "pgamarket/errors.hpp"

namespace pgamarket::numerics {

struct Tolerance {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_iter = 200;

  void validate() const;
};

// Tighter tolerance used for integrals nested inside other integrals.
inline constexpr Tolerance kInnerTolerance{1e-15, 1e-13, 200};

enum class Sign { Negative = -1, Positive = 1 };

struct Bracket {
  double lo;
  double hi;
  Sign f_lo_sign;
  Sign f_hi_sign;
};

using ScalarFn = std::function<double(double)>;

/// Evaluates f at both ends and builds a bracket. Throws NoSignChange when
/// the endpoint values have the same sign (or one is NaN).
Bracket make_bracket(const ScalarFn& f, double lo, double hi);

/// Bracketed root of a continuous function.
///
/// f may return +inf / -inf to report an overflowed evaluation whose sign is
/// known but whose magnitude is not. Such steps fall back to bisection, so a
/// monotone f only needs to get the sign right away from the root.
///
/// Stops when |f(x)| <= abs_tol or the bracket is narrower than
/// abs_tol + rel_tol * |x|.
double find_root(const ScalarFn& f, const Bracket& bracket,
                 const Tolerance& tol = {});

/// Adaptive Gauss-Kronrod (7/15) integral over [a, b]. Throws NonFinite if
/// f returns inf/NaN inside the interval and MaxIterExceeded when the error
/// estimate stays above abs_tol + rel_tol * |result|.
double integrate(const ScalarFn& f, double a, double b,
                 const Tolerance& tol = {});

// value = mantissa * exp(log_scale)
struct ScaledValue {
  double log_scale = 0.0;
  double mantissa = 0.0;

  double value() const { return mantissa * std::exp(log_scale); }
  // log|value|; -inf for zero.
  double log_abs() const { return log_scale + std::log(std::fabs(mantissa)); }
};

/// Integral of exp(exponent(u)) over [a, b], returned in log-scaled form so
/// that exponents in the thousands neither overflow nor lose their sign.
ScaledValue exp_integral_stable(const ScalarFn& exponent, double a, double b,
                                const Tolerance& tol = {});

}  // namespace pgamarket::numerics
