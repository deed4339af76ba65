#pragma once

// Special functions behind the confluent-hypergeometric potential:
//
//   M0(a)    = e^a - sqrt(pi a) erfi(sqrt(a))              (a >= 0)
//   phi(t,x) = sqrt(t) M0([x]_+^2 / 2t)                    (t > 0)
//   lambda(a) = unique positive root of -M0(l^2/2) = a     (a >= 0)
//
// Everything here is a pure function of its arguments.

namespace experts::specfun {

// Dawson's function D(x) = e^{-x^2} int_0^x e^{s^2} ds.
double dawson(double x);

// Imaginary error function (2/sqrt(pi)) int_0^x e^{s^2} ds.
// Overflows to +-inf past |x| ~ 26.6.
double erfi(double x);

// e^{-x^2} erfi(x), finite for every finite x.
double erfi_scaled(double x);

// 2 x D(x) - 1 for x >= 0. Tends to 0 from above as x -> inf with
// 2x D(x) - 1 ~ 1/(2x^2); computed without cancellation for large x.
double two_x_dawson_minus_one(double x);

double m0(double alpha);

// M0(alpha) * e^{-log_shift}. Lets callers compare values whose exponent
// would overflow a double by pulling out a common factor.
double m0_scaled(double alpha, double log_shift);

double phi(double t, double x);
double phi_scaled(double t, double x, double log_shift);

// Closed-form partial derivatives of phi. On the truncated side x < 0 the
// x-derivatives vanish; at x = 0 phi_dxx takes its right limit -1/sqrt(t).
double phi_dx(double t, double x);
double phi_dxx(double t, double x);
double phi_dt(double t, double x);

struct LambdaQuery {
  double alpha = 0.0;
  double tolerance = 1e-10;
};

// Bisection on [0, 3 + sqrt(2 ln(alpha + 1))].
double lambda_inv(const LambdaQuery& q);

inline double lambda_inv(double alpha) { return lambda_inv(LambdaQuery{alpha, 1e-10}); }

// 3 + sqrt(2 ln(alpha + 1)); always >= lambda(alpha).
double lambda_upper_bound(double alpha);

}  // namespace experts::specfun
