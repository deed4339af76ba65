#include "experts/learners.hpp"

#include <algorithm>
#include <cmath>

#include "experts/specfun.hpp"

namespace experts {

std::string to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::MwuFixed:
      return "mwu-fixed";
    case LearnerKind::MwuAnytime:
      return "mwu-anytime";
    case LearnerKind::QuantilePotential:
      return "quantile-potential";
    case LearnerKind::IndependentPotential:
      return "independent-potential";
  }
  return "unknown";
}

LearnerKind learner_kind_from_string(const std::string& name) {
  if (name == "mwu-fixed") return LearnerKind::MwuFixed;
  if (name == "mwu-anytime") return LearnerKind::MwuAnytime;
  if (name == "quantile-potential") return LearnerKind::QuantilePotential;
  if (name == "independent-potential") return LearnerKind::IndependentPotential;
  throw ConfigError("unknown learner kind '" + name + "'");
}

void LearnerConfig::validate() const {
  if (n < 1) throw ConfigError("learner: n must be >= 1");
  if (kind == LearnerKind::MwuFixed && (!horizon || !(*horizon > 0.0))) {
    throw ConfigError("learner: mwu-fixed needs a positive horizon");
  }
  if (eta_override && !(*eta_override > 0.0 && std::isfinite(*eta_override))) {
    throw ConfigError("learner: eta override must be positive");
  }
}

SimplexDistribution softmax_distribution(std::span<const double> gains, double eta) {
  if (gains.empty()) throw DomainError("softmax_distribution: empty gains");
  double top = eta * gains[0];
  for (double g : gains) top = std::max(top, eta * g);
  std::vector<double> w(gains.size());
  for (std::size_t i = 0; i < gains.size(); ++i) w[i] = std::exp(eta * gains[i] - top);
  return SimplexDistribution::normalized(std::move(w));
}

namespace {

double fixed_horizon_eta(const LearnerConfig& cfg) {
  return std::sqrt(2.0 * std::log(static_cast<double>(cfg.n)) / *cfg.horizon);
}

double anytime_eta(const LearnerConfig& cfg, double t) {
  return std::sqrt(std::log(static_cast<double>(cfg.n)) / t);
}

// Normalises non-negative weights; an all-zero (or denormal) vector means the
// potential gradient vanished and the player falls back to uniform.
SimplexDistribution normalize_or_uniform(std::vector<double> w) {
  double sum = 0.0;
  for (double v : w) sum += v;
  if (!(sum >= 1e-300)) return SimplexDistribution::uniform(w.size());
  for (double& v : w) v /= sum;
  return SimplexDistribution(std::move(w));
}

// p_i ∝ erfi(u_i) on u_i > 0, 0 elsewhere. The common factor exp(max u^2) is
// divided out before exponentiating.
SimplexDistribution erfi_weights(const std::vector<double>& u) {
  double top = 0.0;
  for (double v : u) {
    if (v > 0.0) top = std::max(top, v * v);
  }
  std::vector<double> w(u.size(), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] > 0.0) w[i] = specfun::erfi_scaled(u[i]) * std::exp(u[i] * u[i] - top);
  }
  return normalize_or_uniform(std::move(w));
}

void require_positive_time(double t, const char* what) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError(std::string(what) + ": t must be positive");
}

}  // namespace

SimplexDistribution mwu_distribution(const LearnerConfig& cfg, const RegretState& state) {
  cfg.validate();
  if (state.size() != cfg.n) throw DomainError("mwu_distribution: state has wrong dimension");
  double eta = 0.0;
  if (cfg.eta_override) {
    eta = *cfg.eta_override;
  } else if (cfg.kind == LearnerKind::MwuFixed) {
    eta = fixed_horizon_eta(cfg);
  } else {
    eta = anytime_eta(cfg, static_cast<double>(state.round + 1));
  }
  return softmax_distribution(state.cumulative_gain, eta);
}

SimplexDistribution quantile_potential_distribution(std::uint64_t round, std::span<const double> prev_regret) {
  if (round < 1) throw DomainError("quantile_potential_distribution: round must be >= 1");
  if (prev_regret.empty()) throw DomainError("quantile_potential_distribution: empty regret vector");
  const double t = static_cast<double>(round);

  // Entries whose upper probe R/2 + 1 is <= 0 sit entirely in the truncated
  // region and have a zero discrete gradient.
  double top_alpha = 0.0;
  for (double r : prev_regret) {
    const double hi = 0.5 * r + 1.0;
    if (hi > 0.0) top_alpha = std::max(top_alpha, hi * hi / (2.0 * t));
  }
  const double shift = std::max(0.0, top_alpha - 600.0);

  std::vector<double> w(prev_regret.size(), 0.0);
  for (std::size_t i = 0; i < prev_regret.size(); ++i) {
    const double x = 0.5 * prev_regret[i];
    if (x + 1.0 <= 0.0) continue;
    const double d = 0.5 * (specfun::phi_scaled(t, x + 1.0, shift) - specfun::phi_scaled(t, x - 1.0, shift));
    w[i] = std::max(0.0, -d);
  }
  return normalize_or_uniform(std::move(w));
}

SimplexDistribution quantile_potential_distribution_continuous(double t, std::span<const double> regret) {
  require_positive_time(t, "quantile_potential_distribution_continuous");
  std::vector<double> u(regret.size());
  const double scale = 1.0 / std::sqrt(2.0 * t);
  for (std::size_t i = 0; i < regret.size(); ++i) u[i] = 0.5 * regret[i] * scale;
  return erfi_weights(u);
}

SimplexDistribution independent_potential_distribution(double t, std::span<const double> regret) {
  require_positive_time(t, "independent_potential_distribution");
  if (regret.empty()) throw DomainError("independent_potential_distribution: empty regret vector");
  std::vector<double> u(regret.size());
  const double scale = 1.0 / std::sqrt(2.0 * t);
  for (std::size_t i = 0; i < regret.size(); ++i) u[i] = regret[i] * scale;
  return erfi_weights(u);
}

double quantile_potential_value(double t, std::span<const double> regret) {
  double s = 0.0;
  for (double r : regret) s += specfun::phi(t, 0.5 * r);
  return s;
}

double independent_potential_value(double t, std::span<const double> regret) {
  double s = 0.0;
  for (double r : regret) s += specfun::phi(t, r);
  return s;
}

SbhtPoint::SbhtPoint(double t_, std::vector<double> x_) : t(t_), x(std::move(x_)) {
  require_positive_time(t, "SbhtPoint");
  if (x.empty()) throw DomainError("SbhtPoint: empty x");
  for (double& v : x) {
    if (!std::isfinite(v)) throw DomainError("SbhtPoint: non-finite entry");
    v = std::max(v, 0.0);
  }
}

double sbht(const SbhtPoint& point) {
  const double t = point.t;
  const std::size_t n = point.x.size();
  const double scale = 1.0 / std::sqrt(2.0 * t);

  double top = 0.0;
  for (double xi : point.x) top = std::max(top, (xi * scale) * (xi * scale));
  if (top == 0.0) return static_cast<double>(n) / (2.0 * std::sqrt(t));

  // q_i = e^{u_i^2}, Q_i = erfi(u_i), both carried as multiples of e^{top}.
  std::vector<double> q(n), Q(n);
  double theta = 0.0;
  double qq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = point.x[i] * scale;
    const double damp = std::exp(u * u - top);
    q[i] = damp;
    Q[i] = specfun::erfi_scaled(u) * damp;
    theta += Q[i];
    qq += Q[i] * Q[i];
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += q[i] * (2.0 * theta * Q[i] - qq);
  const double scaled = acc / (2.0 * theta * theta * std::sqrt(t));
  if (top <= 700.0) return scaled * std::exp(top);
  if (scaled == 0.0) return 0.0;
  return std::copysign(std::exp(top + std::log(std::abs(scaled))), scaled);
}

double sbht_from_definition(const SbhtPoint& point) {
  const double t = point.t;
  const std::size_t n = point.x.size();
  std::vector<double> grad(n);
  for (std::size_t i = 0; i < n; ++i) grad[i] = -specfun::phi_dx(t, point.x[i]);
  const SimplexDistribution p = normalize_or_uniform(grad);
  double pp = 0.0;
  for (std::size_t i = 0; i < n; ++i) pp += p[i] * p[i];
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dist2 = 1.0 - 2.0 * p[i] + pp;  // |e_i - p|^2
    total += specfun::phi_dt(t, point.x[i]) + 0.5 * specfun::phi_dxx(t, point.x[i]) * dist2;
  }
  return total;
}

Learner::Learner(LearnerConfig cfg, TimeMode mode) : cfg_(std::move(cfg)), mode_(mode) { cfg_.validate(); }

bool Learner::experimental() const {
  return cfg_.kind == LearnerKind::IndependentPotential && mode_ == TimeMode::Discrete;
}

SimplexDistribution Learner::predict(const RegretState& state, double t) const {
  if (state.size() != cfg_.n) throw DomainError("Learner::predict: state has wrong dimension");
  if (mode_ == TimeMode::Discrete) {
    const std::uint64_t round = state.round + 1;
    switch (cfg_.kind) {
      case LearnerKind::MwuFixed:
      case LearnerKind::MwuAnytime:
        return mwu_distribution(cfg_, state);
      case LearnerKind::QuantilePotential:
        return quantile_potential_distribution(round, state.regret);
      case LearnerKind::IndependentPotential:
        return independent_potential_distribution(static_cast<double>(round), state.regret);
    }
  }
  require_positive_time(t, "Learner::predict");
  switch (cfg_.kind) {
    case LearnerKind::MwuFixed:
      return softmax_distribution(state.cumulative_gain, cfg_.eta_override ? *cfg_.eta_override : fixed_horizon_eta(cfg_));
    case LearnerKind::MwuAnytime:
      return softmax_distribution(state.cumulative_gain, cfg_.eta_override ? *cfg_.eta_override : anytime_eta(cfg_, t));
    case LearnerKind::QuantilePotential:
      return quantile_potential_distribution_continuous(t, state.regret);
    case LearnerKind::IndependentPotential:
      return independent_potential_distribution(t, state.regret);
  }
  throw InternalError("Learner::predict: unhandled learner kind");
}

}  // namespace experts
