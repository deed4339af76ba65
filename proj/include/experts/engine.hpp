#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "experts/core.hpp"
#include "experts/environments.hpp"
#include "experts/learners.hpp"

namespace experts {

// Which rounds (or Euler steps) a transcript keeps. every == 0 selects
// 1, 2, 4, 8, ...; the final round is always kept.
struct Stride {
  std::uint64_t every = 0;

  static Stride pow2() { return {}; }
  static Stride each(std::uint64_t k);

  bool sampled(std::uint64_t k, std::uint64_t last) const;
  std::vector<std::uint64_t> points(std::uint64_t last) const;
};

// Called with every sampled state (after the round/step was played).
using StateObserver = std::function<void(const RegretState&)>;

struct GameTranscript {
  std::vector<RegretState> states;
  RegretState final;
  LearnerKind learner_kind = LearnerKind::MwuAnytime;
  std::string environment;  // adversary kind or "brownian"
  std::uint64_t seed = 0;
  bool experimental = false;
  double max_orthogonality_residual = 0.0;  // max_t |<p_t, r_t>|
  double max_identity_residual = 0.0;       // max_t |R - (G - A 1)|
};

struct GameOptions {
  Stride stride;
  bool keep_states = true;
  StateObserver observer;
};

GameTranscript run_discrete_game(const LearnerConfig& learner, const AdversarySpec& adversary, std::uint64_t horizon,
                                 const GameOptions& options = {});

// Euler loop; step k predicts from the state after step k - 1 at time k * dt.
GameTranscript run_continuous_game(const LearnerConfig& learner, const BrownianPathConfig& path, std::uint64_t trial = 0,
                                   const GameOptions& options = {});

// Bound curves.
double mwu_fixed_bound(double horizon, std::size_t n);
double mwu_anytime_bound(double t, std::size_t n);
double quantile_bound(double t, double epsilon);
double independent_bound(double t, std::size_t n);
double discretization_slack(double t, double dt, std::size_t n);

enum class BoundKind { None, MwuFixed, MwuAnytime, Quantile, Independent };
std::string to_string(BoundKind kind);

struct PathSpec {
  double dt = 1e-3;
  // Exactly one way of describing W; identity when all are empty.
  std::optional<double> rho;
  std::vector<double> correlation;  // row-major n x n
  std::vector<double> weights;      // row-major n x n

  CovarianceSpec covariance(std::size_t n) const;
};

struct ExperimentSpec {
  LearnerConfig learner;
  std::optional<AdversarySpec> adversary;
  std::optional<PathSpec> path;
  std::size_t n = 2;
  double horizon = 1000;
  std::uint64_t trials = 1;
  std::vector<double> epsilons;
  std::vector<std::uint64_t> seeds;
  std::uint64_t base_seed = 0;
  Stride stride;

  bool continuous() const { return path.has_value(); }
  void validate() const;
  std::uint64_t trial_seed(std::uint64_t trial) const;
  // epsilons with 1/n prepended when absent; the first entry carries
  // regret-type bounds.
  std::vector<double> effective_epsilons() const;
};

struct TrialRow {
  double t = 0.0;
  std::uint64_t trial = 0;
  double regret = 0.0;
  double epsilon = 0.0;
  double quantile_value = 0.0;
  BoundKind bound_kind = BoundKind::None;
  double bound_value = 0.0;
  bool violation = false;
};

struct AggregateRow {
  double t = 0.0;
  double mean_regret = 0.0;
  double max_regret = 0.0;
  std::vector<double> mean_quantile;  // per effective epsilon
  std::vector<double> bound_value;    // per effective epsilon, NaN for none
  std::vector<BoundKind> bound_kind;
};

struct ExperimentSummary {
  std::uint64_t trials = 0;
  std::vector<double> epsilons;
  std::vector<AggregateRow> aggregates;
  std::vector<TrialRow> rows;  // ordered by (trial, t, epsilon)
  std::uint64_t violation_count = 0;
  std::vector<TrialRow> violations;  // first few, in row order
  double tolerance_scale = 0.0;      // per-row tolerance is this times sqrt(t)
  double slack_coefficient = 0.0;    // continuous only
  bool experimental = false;
  double max_orthogonality_residual = 0.0;
  double terminal_mean_regret = 0.0;
  double terminal_regret_stderr = 0.0;
};

std::size_t default_threads();

// Runs body(i) for i in [0, count) on up to `threads` workers. The first
// failing index (lowest) is rethrown after all workers stop.
void parallel_for(std::uint64_t count, std::size_t threads, const std::function<void(std::uint64_t)>& body);

// The engine's bound for measured values at time t for the given epsilon
// slot (0 is the regret slot).
struct BoundPoint {
  BoundKind kind = BoundKind::None;
  double value = 0.0;
};
BoundPoint bound_at(const ExperimentSpec& spec, double t, double epsilon, bool regret_slot);

ExperimentSummary monte_carlo(const ExperimentSpec& spec, std::size_t threads = 1);

struct MaxOfGaussians {
  double mean = 0.0;
  double stderr_mean = 0.0;
  double reference = 0.0;  // sqrt(2 ln n)
};

// Mean of max_i Z_i over `trials` draws of n i.i.d. standard normals.
MaxOfGaussians max_of_gaussians(std::size_t n, std::uint64_t trials, std::uint64_t seed, std::size_t threads = 1);

}  // namespace experts
