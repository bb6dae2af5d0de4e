#pragma once

// Self-contained special functions and adaptive quadrature. Everything here is
// implemented locally (series / recurrences only) so that CLI output is
// bit-reproducible across machines with the same FPU semantics.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>

#include "phasecrystal/errors.hpp"

namespace phasecrystal::specfun {

inline constexpr double pi = 3.14159265358979323846;

/// Physicists' Hermite polynomial H_n(x), forward recurrence
/// H_{n+1} = 2 x H_n - 2 n H_{n-1}. Overflows to +-inf for extreme n*x.
inline double hermite(int n, double x) {
  if (n == 0) return 1.0;
  double hm = 1.0, h = 2.0 * x;
  for (int m = 1; m < n; ++m) {
    double hp = 2.0 * x * h - 2.0 * m * hm;
    hm = h;
    h = hp;
  }
  return h;
}

/// Generalized Laguerre polynomial L_n^k(x) for integer k >= -n.
/// Three-term recurrence in n; negative integer k is reduced to positive k
/// through L_n^{-m}(x) = (n-m)!/n! (-x)^m L_{n-m}^{m}(x).
inline double laguerre_gen(int n, int k, double x) {
  if (k < 0) {
    int m = -k;
    if (m > n) return 0.0;  // (n-m)! pole: polynomial vanishes identically
    double lg = std::lgamma(n - m + 1.0) - std::lgamma(n + 1.0);
    double p = (m % 2 ? -1.0 : 1.0) * std::pow(x, m);
    return std::exp(lg) * p * laguerre_gen(n - m, m, x);
  }
  if (n == 0) return 1.0;
  double lm = 1.0, l = 1.0 + k - x;
  for (int m = 1; m < n; ++m) {
    double lp = ((2.0 * m + k + 1.0 - x) * l - (m + k) * lm) / (m + 1.0);
    lm = l;
    l = lp;
  }
  return l;
}

namespace detail {

// e^{-x} I0(x) by asymptotic series truncated at its smallest term; the
// optimal-truncation error ~ e^{-2x} is negligible for x >= 20.
inline double i0_scaled_asymptotic(double x) {
  double sum = 1.0, term = 1.0;
  for (int k = 1; k <= 40; ++k) {
    double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-18 * sum) break;
  }
  return sum / std::sqrt(2.0 * pi * x);
}

// Power series for I0(x), accurate for moderate x.
inline double i0_series(double x) {
  double sum = 1.0, term = 1.0, q = x * x / 4.0;
  for (int m = 1; m <= 200; ++m) {
    term *= q / (double(m) * m);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

}  // namespace detail

/// Modified Bessel function I0(x), x >= 0.
inline double bessel_i0(double x) {
  if (x < 20.0) return detail::i0_series(x);
  return detail::i0_scaled_asymptotic(x) * std::exp(x);
}

/// Exponentially scaled modified Bessel function e^{-x} I0(x); safe for large x.
inline double bessel_i0_scaled(double x) {
  if (x < 20.0) return detail::i0_series(x) * std::exp(-x);
  return detail::i0_scaled_asymptotic(x);
}

/// Cylindrical Bessel function J_j(x) for integer order (any sign), by
/// downward (Miller) recurrence normalized with J_0 + 2 sum_k J_{2k} = 1.
inline double bessel_j(int j, double x) {
  int n = std::abs(j);
  // J_j(-x) = (-1)^j J_j(x); J_{-j}(x) = (-1)^j J_j(x)
  double sign = 1.0;
  if (x < 0) {
    x = -x;
    if (n % 2) sign = -sign;
  }
  if (j < 0 && n % 2) sign = -sign;
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  if (x < 1e-8) {  // tiny argument: leading series term avoids underflow noise
    double v = 1.0;
    for (int m = 1; m <= n; ++m) v *= x / (2.0 * m);
    return sign * v;
  }
  int mstart = n + 20 + int(std::ceil(1.5 * x));
  if (mstart % 2) ++mstart;
  double jp = 0.0, jc = 1e-300, target = 0.0, norm = 0.0;
  for (int m = mstart; m >= 1; --m) {
    double jm = (2.0 * m / x) * jc - jp;
    jp = jc;
    jc = jm;
    if (m - 1 == n) target = jc;
    if ((m - 1) % 2 == 0) norm += (m - 1 == 0) ? jc : 2.0 * jc;
    if (std::abs(jc) > 1e250) {  // rescale to dodge overflow
      jp /= 1e250;
      jc /= 1e250;
      target /= 1e250;
      norm /= 1e250;
    }
  }
  return sign * target / norm;
}

/// Absolute-tolerance adaptive quadrature control.
struct QuadratureSpec {
  double half_width = 8.0;   ///< integrate over [-half_width, half_width]
  double abs_tol = 1e-10;    ///< absolute tolerance on the integral
  int max_depth = 28;        ///< bisection depth limit

  void validate() const {
    if (!(half_width > 0)) throw ValidationError("QuadratureSpec: half_width must be > 0");
    if (!(abs_tol > 0)) throw ValidationError("QuadratureSpec: abs_tol must be > 0");
    if (max_depth < 1) throw ValidationError("QuadratureSpec: max_depth must be >= 1");
  }
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

namespace detail {

struct SimpsonState {
  const std::function<double(double)>& f;
  double tol;
  int max_depth;
  double err = 0.0;

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol_here,
                 int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double h = b - a;
    double left = h / 12.0 * (fa + 4.0 * flm + fm);
    double right = h / 12.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth >= max_depth || std::abs(delta) <= 15.0 * tol_here) {
      err += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;  // Richardson extrapolation
    }
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol_here, depth + 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol_here, depth + 1);
  }
};

}  // namespace detail

/// Adaptive Simpson integration of f over [-half_width, half_width].
/// Throws NonConvergence when the depth limit is hit with an error estimate
/// still above 10x the requested tolerance.
inline QuadratureResult integrate(const std::function<double(double)>& f, const QuadratureSpec& spec) {
  spec.validate();
  double a = -spec.half_width, b = spec.half_width;
  detail::SimpsonState st{f, spec.abs_tol, spec.max_depth};
  // seed with a handful of panels so symmetric integrands cannot fool the
  // first error estimate
  const int panels = 8;
  double h = (b - a) / panels, total = 0.0;
  for (int i = 0; i < panels; ++i) {
    double x0 = a + i * h, x1 = x0 + h, xm = 0.5 * (x0 + x1);
    double f0 = f(x0), fm = f(xm), f1 = f(x1);
    double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
    total += st.recurse(x0, x1, f0, fm, f1, whole, spec.abs_tol / panels, 0);
  }
  if (st.err > 10.0 * spec.abs_tol)
    throw NonConvergence("integrate: error estimate " + std::to_string(st.err) +
                         " above 10x tolerance after depth limit");
  return {total, st.err};
}

/// log Gamma((N+1)/2) - log Gamma(N/2); the ratio needed by the contact-value
/// formula stays finite for N up to many hundreds in log space.
inline double log_gamma_half_ratio(int n) {
  return std::lgamma((n + 1.0) / 2.0) - std::lgamma(n / 2.0);
}

/// log n!
inline double log_factorial(int n) { return std::lgamma(n + 1.0); }

}  // namespace phasecrystal::specfun
