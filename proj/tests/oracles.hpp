#pragma once

// Independent reference implementations used by the unit tests. These share
// no code with the library: long-double series and plain quadrature.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

using ld = long double;

inline constexpr ld kPi = 3.141592653589793238462643383279502884L;

// (2/sqrt(pi)) sum_{k<=terms} x^{2k+1} / (k! (2k+1)), long double.
inline ld erfi_series(ld x, int terms = 400) {
  const ld x2 = x * x;
  ld term = x;
  ld sum = x;
  for (int k = 1; k <= terms; ++k) {
    term *= x2 / k;
    const ld add = term / (2 * k + 1);
    sum += add;
    if (std::fabs(add) < 1e-22L * std::fabs(sum) && k > 60 && k > 2 * x2) break;
  }
  return 2.0L / std::sqrt(kPi) * sum;
}

// Truncated at exactly k <= 60, as in the reference statement for erfi(1).
inline ld erfi_series60(ld x) {
  const ld x2 = x * x;
  ld term = x;
  ld sum = x;
  for (int k = 1; k <= 60; ++k) {
    term *= x2 / k;
    sum += term / (2 * k + 1);
  }
  return 2.0L / std::sqrt(kPi) * sum;
}

inline ld dawson_series(ld x) { return std::exp(-x * x) * std::sqrt(kPi) / 2.0L * erfi_series(x); }

// M0(a) = 1 - sum_{k>=1} a^k / ((2k - 1) k!), long double.
inline ld m0_series(ld a) {
  ld term = 1.0L;  // a^k / k!
  ld sum = 0.0L;
  for (int k = 1; k < 2000; ++k) {
    term *= a / k;
    const ld add = term / (2 * k - 1);
    sum += add;
    if (k > 2 * a + 10 && add < 1e-22L * (1.0L + sum)) break;
  }
  return 1.0L - sum;
}

// Composite Simpson on [a, b] with m (even) panels.
inline ld simpson(const std::function<ld(ld)>& f, ld a, ld b, int m = 20000) {
  const ld h = (b - a) / m;
  ld s = f(a) + f(b);
  for (int i = 1; i < m; ++i) s += f(a + i * h) * ((i % 2) ? 4.0L : 2.0L);
  return s * h / 3.0L;
}

// erfi by quadrature of (2/sqrt(pi)) e^{s^2}.
inline ld erfi_quadrature(ld x) {
  return 2.0L / std::sqrt(kPi) * simpson([](ld s) { return std::exp(s * s); }, 0.0L, x);
}

// M0 directly from its definition with quadrature erfi.
inline ld m0_quadrature(ld a) { return std::exp(a) - std::sqrt(kPi * a) * erfi_quadrature(std::sqrt(a)); }

inline ld phi(ld t, ld x) {
  const ld xp = x > 0 ? x : 0;
  return std::sqrt(t) * m0_series(xp * xp / (2 * t));
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracle
