#include "pgamarket/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace pgamarket::numerics {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Sign sign_of(double x) { return x < 0.0 ? Sign::Negative : Sign::Positive; }

double checked(const ScalarFn& f, double x) {
  const double y = f(x);
  if (!std::isfinite(y)) {
    std::ostringstream os;
    os << "integrand is not finite at x = " << x;
    throw NonFinite(os.str());
  }
  return y;
}

struct Segment {
  double a;
  double b;
  double result;
  double error;
  double abs_result;

  bool operator<(const Segment& other) const { return error < other.error; }
};

// One G7/K15 panel with the QUADPACK error heuristic.
Segment gauss_kronrod_panel(const ScalarFn& f, double a, double b) {
  using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
  using Gauss = boost::math::quadrature::gauss<double, 7>;
  static const auto& xk = Kronrod::abscissa();
  static const auto& wk = Kronrod::weights();
  static const auto& wg = Gauss::weights();

  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  std::array<double, 15> fx{};
  fx[0] = checked(f, center);
  for (std::size_t i = 1; i < xk.size(); ++i) {
    fx[2 * i - 1] = checked(f, center - half * xk[i]);
    fx[2 * i] = checked(f, center + half * xk[i]);
  }

  double kronrod = wk[0] * fx[0];
  double gauss = wg[0] * fx[0];
  double abs_k = wk[0] * std::fabs(fx[0]);
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const double pair = fx[2 * i - 1] + fx[2 * i];
    kronrod += wk[i] * pair;
    abs_k += wk[i] * (std::fabs(fx[2 * i - 1]) + std::fabs(fx[2 * i]));
    // Gauss nodes are the even-indexed Kronrod abscissae.
    if (i % 2 == 0) gauss += wg[i / 2] * pair;
  }
  const double mean = 0.5 * kronrod;
  double asc = wk[0] * std::fabs(fx[0] - mean);
  for (std::size_t i = 1; i < xk.size(); ++i) {
    asc += wk[i] * (std::fabs(fx[2 * i - 1] - mean) + std::fabs(fx[2 * i] - mean));
  }

  const double result = kronrod * half;
  const double abs_result = abs_k * std::fabs(half);
  const double resasc = asc * std::fabs(half);
  double err = std::fabs((kronrod - gauss) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  if (abs_result > std::numeric_limits<double>::min() / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * abs_result, err);
  }
  return {a, b, result, err, abs_result};
}

}  // namespace

void Tolerance::validate() const {
  if (!(abs_tol > 0.0)) throw DomainError("abs_tol must be positive");
  if (!(rel_tol >= 0.0)) throw DomainError("rel_tol must be nonnegative");
  if (max_iter < 1) throw DomainError("max_iter must be at least 1");
}

Bracket make_bracket(const ScalarFn& f, double lo, double hi) {
  if (!(lo < hi)) throw DomainError("bracket requires lo < hi");
  const double flo = f(lo);
  const double fhi = f(hi);
  if (std::isnan(flo) || std::isnan(fhi)) {
    throw NoSignChange("function is NaN at a bracket endpoint");
  }
  if (flo == 0.0 || fhi == 0.0) {
    // An exact root at an endpoint still counts as bracketed.
    const Sign slo = flo == 0.0 ? Sign::Negative : sign_of(flo);
    const Sign shi = fhi == 0.0 ? (slo == Sign::Negative ? Sign::Positive : Sign::Negative)
                                : sign_of(fhi);
    return {lo, hi, slo, shi};
  }
  if (sign_of(flo) == sign_of(fhi)) {
    std::ostringstream os;
    os << "no sign change on [" << lo << ", " << hi << "]: f(lo) = " << flo
       << ", f(hi) = " << fhi;
    throw NoSignChange(os.str());
  }
  return {lo, hi, sign_of(flo), sign_of(fhi)};
}

double find_root(const ScalarFn& f, const Bracket& bracket, const Tolerance& tol) {
  tol.validate();
  if (!(bracket.lo < bracket.hi)) throw DomainError("bracket requires lo < hi");
  if (bracket.f_lo_sign == bracket.f_hi_sign) {
    throw NoSignChange("bracket endpoints carry the same sign");
  }

  auto eval = [&](double x) {
    const double y = f(x);
    if (std::isnan(y)) {
      std::ostringstream os;
      os << "root function is NaN at x = " << x;
      throw NonFinite(os.str());
    }
    return y;
  };

  double a = bracket.lo;
  double b = bracket.hi;
  double fa = eval(a);
  double fb = eval(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (sign_of(fa) == sign_of(fb)) {
    throw NoSignChange("function values at the bracket ends share a sign");
  }

  // Brent's method; interpolation only when all three points carry values.
  double c = b;
  double fc = fb;
  double d = b - a;
  double e = d;
  for (int iter = 0; iter < tol.max_iter; ++iter) {
    if ((fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * kEps * std::fabs(b) + 0.5 * (tol.abs_tol + tol.rel_tol * std::fabs(b));
    const double xm = 0.5 * (c - b);
    if (std::fabs(xm) <= tol1 || std::fabs(fb) <= tol.abs_tol) return b;

    const bool have_values = std::isfinite(fa) && std::isfinite(fb) && std::isfinite(fc);
    if (have_values && std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      const double s = fb / fa;
      double p;
      double q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::fabs(p);
      const double min1 = 3.0 * xm * q - std::fabs(tol1 * q);
      const double min2 = std::fabs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::fabs(d) > tol1 ? d : std::copysign(tol1, xm);
    fb = eval(b);
  }
  std::ostringstream os;
  os << "root finder did not converge in " << tol.max_iter << " iterations";
  throw MaxIterExceeded(os.str());
}

double integrate(const ScalarFn& f, double a, double b, const Tolerance& tol) {
  tol.validate();
  if (std::isnan(a) || std::isnan(b)) throw DomainError("integration limits are NaN");
  if (a > b) throw DomainError("integrate requires a <= b");
  if (a == b) return 0.0;

  std::priority_queue<Segment> heap;
  Segment first = gauss_kronrod_panel(f, a, b);
  double total = first.result;
  double total_err = first.error;
  double total_abs = first.abs_result;
  heap.push(first);

  auto converged = [&] {
    const double target =
        std::max(tol.abs_tol + tol.rel_tol * std::fabs(total), 100.0 * kEps * total_abs);
    return total_err <= target;
  };

  for (int iter = 1; !converged(); ++iter) {
    if (iter >= tol.max_iter) {
      std::ostringstream os;
      os << "quadrature on [" << a << ", " << b << "] did not reach tolerance after "
         << tol.max_iter << " subdivisions (error estimate " << total_err << ")";
      throw MaxIterExceeded(os.str());
    }
    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Panel cannot be split further in double precision.
      heap.push(worst);
      break;
    }
    const Segment left = gauss_kronrod_panel(f, worst.a, mid);
    const Segment right = gauss_kronrod_panel(f, mid, worst.b);
    total += left.result + right.result - worst.result;
    total_err += left.error + right.error - worst.error;
    total_abs += left.abs_result + right.abs_result - worst.abs_result;
    heap.push(left);
    heap.push(right);
  }

  // Resum to shed the drift from incremental updates.
  double sum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().result;
    heap.pop();
  }
  return sum;
}

ScaledValue exp_integral_stable(const ScalarFn& exponent, double a, double b,
                                const Tolerance& tol) {
  if (a > b) throw DomainError("exp_integral_stable requires a <= b");
  if (a == b) return {0.0, 0.0};

  constexpr int kSamples = 33;
  double shift = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kSamples; ++i) {
    const double u = a + (b - a) * static_cast<double>(i) / (kSamples - 1);
    const double g = exponent(u);
    if (std::isnan(g)) throw NonFinite("exponent is NaN");
    shift = std::max(shift, g);
  }
  if (!std::isfinite(shift)) throw NonFinite("exponent is not finite on the interval");

  const double mantissa =
      integrate([&](double u) { return std::exp(exponent(u) - shift); }, a, b, tol);
  return {shift, mantissa};
}

}  // namespace pgamarket::numerics
