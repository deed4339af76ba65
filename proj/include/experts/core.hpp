#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "experts/errors.hpp"

namespace experts {

// A probability vector over n experts.
class SimplexDistribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  // Validates non-negativity and unit sum; throws DomainError otherwise.
  explicit SimplexDistribution(std::vector<double> weights);

  static SimplexDistribution uniform(std::size_t n);

  // Normalises a non-negative vector with positive sum.
  static SimplexDistribution normalized(std::vector<double> unnormalized);

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }

 private:
  std::vector<double> weights_;
};

enum class GainKind { Discrete, ContinuousIncrement };

struct GainVector {
  std::vector<double> gains;
  GainKind kind = GainKind::Discrete;

  // Discrete gains must lie in [-1, 1]; increments only need to be finite.
  void validate() const;
  std::size_t size() const { return gains.size(); }
};

// Regret bookkeeping for one game. `regret` is what learners read; the
// cumulative gains and the player's gain are kept alongside it so that the
// identity regret = G - A * 1 can be audited.
struct RegretState {
  std::uint64_t round = 0;
  double time = 0.0;
  std::vector<double> regret;
  std::vector<double> cumulative_gain;
  double player_gain = 0.0;

  static RegretState zero(std::size_t n);

  std::size_t size() const { return regret.size(); }

  // Plays one discrete round: round += 1. Returns <p, g>.
  double apply_round(const SimplexDistribution& p, const GainVector& g);

  // Plays one Euler step of length dt. Returns <p, dG>.
  double apply_increment(const SimplexDistribution& p, const GainVector& dg, double dt);

  // max_i |regret_i - (G_i - A)|
  double identity_residual() const;
};

struct QuantileQuery {
  double epsilon = 1.0;

  explicit QuantileQuery(double eps);
};

// Index k = ceil(eps * n) of the order statistic that quantile() returns,
// with eps * n within 1e-12 of an integer snapped to it.
std::size_t quantile_rank(double epsilon, std::size_t n);

// ceil(eps n)-th largest entry of x.
double quantile(const QuantileQuery& q, std::span<const double> x);

// g - <p, g> 1
std::vector<double> instantaneous_regret(const SimplexDistribution& p, const GainVector& g);

double dot(std::span<const double> a, std::span<const double> b);

// Unit-step finite differences of a bivariate function f(t, x):
//   f_t  = f(t, x) - f(t - 1, x)
//   f_x  = (f(t, x + 1) - f(t, x - 1)) / 2
//   f_xx = f(t, x + 1) + f(t, x - 1) - 2 f(t, x)
template <class F>
double discrete_deriv_t(F&& f, double t, double x) {
  return f(t, x) - f(t - 1.0, x);
}

template <class F>
double discrete_deriv_x(F&& f, double t, double x) {
  return 0.5 * (f(t, x + 1.0) - f(t, x - 1.0));
}

template <class F>
double discrete_deriv_xx(F&& f, double t, double x) {
  return f(t, x + 1.0) + f(t, x - 1.0) - 2.0 * f(t, x);
}

}  // namespace experts
