#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "experts/core.hpp"

namespace experts {

enum class LearnerKind { MwuFixed, MwuAnytime, QuantilePotential, IndependentPotential };

std::string to_string(LearnerKind kind);
LearnerKind learner_kind_from_string(const std::string& name);

struct LearnerConfig {
  LearnerKind kind = LearnerKind::QuantilePotential;
  std::size_t n = 1;
  // Known horizon T; required for MwuFixed. Rounds in the discrete game,
  // terminal time in the continuous one.
  std::optional<double> horizon;
  // Replaces the learning-rate schedule of the MWU kinds by a constant.
  std::optional<double> eta_override;

  void validate() const;
};

enum class TimeMode { Discrete, Continuous };

// p_i proportional to exp(eta G_i). Uses the discrete schedule: the
// fixed-horizon rate sqrt(2 ln n / T), or the anytime rate
// sqrt(ln n / t) for the round t = state.round + 1 being predicted.
SimplexDistribution mwu_distribution(const LearnerConfig& cfg, const RegretState& state);

// Softmax of eta * gains, shifted by the max so that |eta G| up to ~700
// never overflows.
SimplexDistribution softmax_distribution(std::span<const double> gains, double eta);

// Discrete quantile-potential player for round t >= 1, from R_{t-1}.
SimplexDistribution quantile_potential_distribution(std::uint64_t round, std::span<const double> prev_regret);

// Continuous-time version of the same player: p_i ∝ -d/dx phi(t, R_i / 2).
SimplexDistribution quantile_potential_distribution_continuous(double t, std::span<const double> regret);

// p_i ∝ -d/dx phi(t, R_i) = sqrt(pi/2) erfi(R_i / sqrt(2t)) for R_i > 0.
SimplexDistribution independent_potential_distribution(double t, std::span<const double> regret);

// sum_i phi(t, x_i / 2)
double quantile_potential_value(double t, std::span<const double> regret);
// sum_i phi(t, x_i)
double independent_potential_value(double t, std::span<const double> regret);

struct SbhtPoint {
  double t = 1.0;
  std::vector<double> x;  // negative entries are clamped to 0 on construction

  SbhtPoint(double t, std::vector<double> x);
};

// d/dt Phi + 1/2 sum_i d_ii Phi |e_i - p|^2 for Phi(t, x) = sum_i phi(t, x_i),
// evaluated through the q / Q / Theta closed form.
double sbht(const SbhtPoint& point);

// The Θ-free form straight from the definition, with p taken from the phi
// derivatives. Used to cross-check sbht().
double sbht_from_definition(const SbhtPoint& point);

// A player strategy behind one interface. Learners hold no game state; they
// map the regret state before a round (or Euler step) to a distribution.
class Learner {
 public:
  Learner(LearnerConfig cfg, TimeMode mode);

  const LearnerConfig& config() const { return cfg_; }
  TimeMode mode() const { return mode_; }

  // Discrete: `state` holds rounds 1..t-1 and t = state.round + 1.
  // Continuous: `state` is the left limit at time `t` (> 0).
  SimplexDistribution predict(const RegretState& state, double t) const;

  // Discrete play of the independent-experts potential has no proven bound.
  bool experimental() const;

 private:
  LearnerConfig cfg_;
  TimeMode mode_;
};

}  // namespace experts
