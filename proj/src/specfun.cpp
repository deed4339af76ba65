#include "experts/specfun.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "experts/errors.hpp"

namespace experts::specfun {
namespace {

constexpr double kSeriesCutoff = 1.5;
constexpr double kAsymptoticCutoff = 8.0;
constexpr double kInvSqrtPi = std::numbers::inv_sqrtpi;
constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw DomainError(std::string(what) + ": non-finite argument");
  }
}

// sum_k x^{2k+1} / (k! (2k+1)) = (sqrt(pi)/2) erfi(x). All terms share the
// sign of x, so the partial sums carry no cancellation.
double erfi_series_core(double x) {
  const double x2 = x * x;
  double term = x;
  double sum = x;
  for (int k = 1; k < 200; ++k) {
    term *= x2 / k;
    const double add = term / (2 * k + 1);
    sum += add;
    if (std::abs(add) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Rybicki's sampling-theorem representation
//   D(x) = lim_{h->0} pi^{-1/2} sum_{n odd} e^{-(x - n h)^2} / n,
// whose error for finite h is O(exp(-(pi / 2h)^2)). With h = 0.2 that is
// below 1e-26. The sum is re-centred on the nearest even multiple of h so
// that only two exponentials are needed per call.
constexpr double kRybickiH = 0.2;
constexpr int kRybickiTerms = 22;

const std::array<double, kRybickiTerms>& rybicki_weights() {
  static const std::array<double, kRybickiTerms> w = [] {
    std::array<double, kRybickiTerms> c{};
    for (int i = 0; i < kRybickiTerms; ++i) {
      const double m = (2 * i + 1) * kRybickiH;
      c[i] = std::exp(-m * m);
    }
    return c;
  }();
  return w;
}

double dawson_rybicki(double x) {
  const auto& c = rybicki_weights();
  const double ax = std::abs(x);
  const double n0 = 2.0 * std::nearbyint(0.5 * ax / kRybickiH);
  const double xp = ax - n0 * kRybickiH;
  double e1 = std::exp(2.0 * xp * kRybickiH);
  const double e2 = e1 * e1;
  double d1 = n0 + 1.0;
  double d2 = d1 - 2.0;
  double sum = 0.0;
  for (int i = 0; i < kRybickiTerms; ++i) {
    sum += c[i] * (e1 / d1 + 1.0 / (d2 * e1));
    d1 += 2.0;
    d2 -= 2.0;
    e1 *= e2;
  }
  const double d = kInvSqrtPi * std::exp(-xp * xp) * sum;
  return std::copysign(d, x);
}

// 2x D(x) - 1 ~ sum_{k>=1} (2k-1)!! / (2x^2)^k, truncated at its smallest term.
double two_x_dawson_minus_one_asymptotic(double x) {
  const double inv = 1.0 / (2.0 * x * x);
  double term = inv;
  double sum = inv;
  for (int k = 1; k < 400; ++k) {
    const double ratio = (2 * k + 1) * inv;
    if (ratio >= 1.0) break;
    term *= ratio;
    sum += term;
    if (term <= 1e-17 * sum) break;
  }
  return sum;
}

}  // namespace

double dawson(double x) {
  require_finite(x, "dawson");
  if (std::abs(x) <= kSeriesCutoff) {
    return std::exp(-x * x) * erfi_series_core(x);
  }
  return dawson_rybicki(x);
}

double erfi(double x) {
  require_finite(x, "erfi");
  if (std::abs(x) <= kSeriesCutoff) {
    return kTwoOverSqrtPi * erfi_series_core(x);
  }
  return kTwoOverSqrtPi * std::exp(x * x) * dawson_rybicki(x);
}

double erfi_scaled(double x) {
  require_finite(x, "erfi_scaled");
  return kTwoOverSqrtPi * dawson(x);
}

double two_x_dawson_minus_one(double x) {
  require_finite(x, "two_x_dawson_minus_one");
  if (x < 0.0) throw DomainError("two_x_dawson_minus_one: x < 0");
  if (x > kAsymptoticCutoff) return two_x_dawson_minus_one_asymptotic(x);
  return 2.0 * x * dawson(x) - 1.0;
}

double m0_scaled(double alpha, double log_shift) {
  require_finite(alpha, "m0");
  if (alpha < 0.0) throw DomainError("m0: alpha < 0");
  const double x = std::sqrt(alpha);
  if (x <= kSeriesCutoff) {
    // e^a - sqrt(pi a) erfi(sqrt a) = e^a - 2x S(x)
    return std::exp(alpha - log_shift) - 2.0 * x * erfi_series_core(x) * std::exp(-log_shift);
  }
  return -std::exp(alpha - log_shift) * two_x_dawson_minus_one(x);
}

double m0(double alpha) { return m0_scaled(alpha, 0.0); }

namespace {
void require_positive_time(double t, const char* what) {
  if (!std::isfinite(t) || t <= 0.0) {
    throw DomainError(std::string(what) + ": t must be positive and finite");
  }
}
}  // namespace

double phi_scaled(double t, double x, double log_shift) {
  require_positive_time(t, "phi");
  require_finite(x, "phi");
  const double xp = x > 0.0 ? x : 0.0;
  return std::sqrt(t) * m0_scaled(xp * xp / (2.0 * t), log_shift);
}

double phi(double t, double x) { return phi_scaled(t, x, 0.0); }

double phi_dx(double t, double x) {
  require_positive_time(t, "phi_dx");
  require_finite(x, "phi_dx");
  if (x <= 0.0) return 0.0;
  return -std::sqrt(std::numbers::pi / 2.0) * erfi(x / std::sqrt(2.0 * t));
}

double phi_dxx(double t, double x) {
  require_positive_time(t, "phi_dxx");
  require_finite(x, "phi_dxx");
  if (x < 0.0) return 0.0;
  return -std::exp(x * x / (2.0 * t)) / std::sqrt(t);
}

double phi_dt(double t, double x) {
  require_positive_time(t, "phi_dt");
  require_finite(x, "phi_dt");
  const double xp = x > 0.0 ? x : 0.0;
  return std::exp(xp * xp / (2.0 * t)) / (2.0 * std::sqrt(t));
}

double lambda_upper_bound(double alpha) { return 3.0 + std::sqrt(2.0 * std::log1p(alpha)); }

double lambda_inv(const LambdaQuery& q) {
  if (!std::isfinite(q.alpha) || q.alpha < 0.0) throw DomainError("lambda_inv: alpha must be finite and >= 0");
  if (!(q.tolerance > 0.0)) throw DomainError("lambda_inv: tolerance must be positive");

  auto residual = [&](double l) { return -m0(0.5 * l * l) - q.alpha; };

  double lo = 0.0;
  double hi = lambda_upper_bound(q.alpha);
  const double f_hi = residual(hi);
  if (f_hi < 0.0) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "lambda_inv: bracket [0, " << hi << "] does not contain the root for alpha=" << q.alpha
        << " (residual at upper end " << f_hi << ")";
    throw InternalError(msg.str());
  }
  if (std::abs(f_hi) <= q.tolerance) return hi;

  double f_lo = residual(lo);
  double f_hi_cur = f_hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket is down to adjacent doubles
    const double fm = residual(mid);
    if (std::abs(fm) <= q.tolerance) return mid;
    if (fm < 0.0) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
      f_hi_cur = fm;
    }
  }
  return std::abs(f_lo) < std::abs(f_hi_cur) ? lo : hi;
}

}  // namespace experts::specfun
