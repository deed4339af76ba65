#include "experts/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

namespace experts {

SimplexDistribution::SimplexDistribution(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw DomainError("SimplexDistribution: empty weight vector");
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw DomainError("SimplexDistribution: negative or non-finite weight " + std::to_string(w));
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw DomainError("SimplexDistribution: weights sum to " + std::to_string(sum));
  }
}

SimplexDistribution SimplexDistribution::uniform(std::size_t n) {
  if (n == 0) throw DomainError("SimplexDistribution::uniform: n = 0");
  return SimplexDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

SimplexDistribution SimplexDistribution::normalized(std::vector<double> unnormalized) {
  const double sum = std::accumulate(unnormalized.begin(), unnormalized.end(), 0.0);
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw DomainError("SimplexDistribution::normalized: weights must have positive finite sum");
  }
  for (double& w : unnormalized) w /= sum;
  return SimplexDistribution(std::move(unnormalized));
}

void GainVector::validate() const {
  for (std::size_t i = 0; i < gains.size(); ++i) {
    const double g = gains[i];
    if (!std::isfinite(g)) throw DomainError("GainVector: non-finite entry at " + std::to_string(i));
    if (kind == GainKind::Discrete && (g < -1.0 || g > 1.0)) {
      throw DomainError("GainVector: discrete gain " + std::to_string(g) + " outside [-1, 1] at " +
                        std::to_string(i));
    }
  }
}

RegretState RegretState::zero(std::size_t n) {
  RegretState s;
  s.regret.assign(n, 0.0);
  s.cumulative_gain.assign(n, 0.0);
  return s;
}

namespace {
double accumulate_step(RegretState& s, const SimplexDistribution& p, const GainVector& g) {
  if (p.size() != s.size() || g.size() != s.size()) {
    throw DomainError("RegretState: dimension mismatch");
  }
  const double pg = dot(p.weights(), g.gains);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s.regret[i] += g.gains[i] - pg;
    s.cumulative_gain[i] += g.gains[i];
  }
  s.player_gain += pg;
  return pg;
}
}  // namespace

double RegretState::apply_round(const SimplexDistribution& p, const GainVector& g) {
  const double pg = accumulate_step(*this, p, g);
  ++round;
  time = static_cast<double>(round);
  return pg;
}

double RegretState::apply_increment(const SimplexDistribution& p, const GainVector& dg, double dt) {
  const double pg = accumulate_step(*this, p, dg);
  ++round;
  time = static_cast<double>(round) * dt;
  return pg;
}

double RegretState::identity_residual() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    worst = std::max(worst, std::abs(regret[i] - (cumulative_gain[i] - player_gain)));
  }
  return worst;
}

QuantileQuery::QuantileQuery(double eps) : epsilon(eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("QuantileQuery: epsilon must lie in (0, 1]");
}

std::size_t quantile_rank(double epsilon, std::size_t n) {
  const double en = epsilon * static_cast<double>(n);
  const double nearest = std::round(en);
  const double k = std::abs(en - nearest) <= 1e-12 ? nearest : std::ceil(en);
  return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, n);
}

double quantile(const QuantileQuery& q, std::span<const double> x) {
  if (x.empty()) throw DomainError("quantile: empty vector");
  const std::size_t k = quantile_rank(q.epsilon, x.size());
  std::vector<double> sorted(x.begin(), x.end());
  std::stable_sort(sorted.begin(), sorted.end(), std::greater<>());
  return sorted[k - 1];
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> instantaneous_regret(const SimplexDistribution& p, const GainVector& g) {
  if (p.size() != g.size()) throw DomainError("instantaneous_regret: dimension mismatch");
  const double pg = dot(p.weights(), g.gains);
  std::vector<double> r(g.gains);
  for (double& v : r) v -= pg;
  return r;
}

}  // namespace experts
