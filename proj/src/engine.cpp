#include "experts/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "experts/specfun.hpp"

namespace experts {

Stride Stride::each(std::uint64_t k) {
  if (k == 0) throw ConfigError("stride must be >= 1");
  return Stride{k};
}

bool Stride::sampled(std::uint64_t k, std::uint64_t last) const {
  if (k == 0 || k > last) return false;
  if (k == last) return true;
  if (every == 0) return (k & (k - 1)) == 0;
  return k % every == 0;
}

std::vector<std::uint64_t> Stride::points(std::uint64_t last) const {
  std::vector<std::uint64_t> out;
  if (every == 0) {
    for (std::uint64_t k = 1; k < last && k != 0; k <<= 1) out.push_back(k);
  } else {
    for (std::uint64_t k = every; k < last; k += every) out.push_back(k);
  }
  if (last > 0) out.push_back(last);
  return out;
}

namespace {

// Rethrows the active exception with `prefix` prepended, keeping its category.
[[noreturn]] void rethrow_with_context(const std::string& prefix) {
  try {
    throw;
  } catch (const EndOfSequence& e) {
    throw EndOfSequence(prefix + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const DomainError& e) {
    throw DomainError(prefix + e.what());
  } catch (const InternalError& e) {
    throw InternalError(prefix + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(prefix + e.what());
  }
}

void record(GameTranscript& tr, const RegretState& s, const GameOptions& opt) {
  tr.max_identity_residual = std::max(tr.max_identity_residual, s.identity_residual());
  if (opt.keep_states) tr.states.push_back(s);
  if (opt.observer) opt.observer(s);
}

}  // namespace

GameTranscript run_discrete_game(const LearnerConfig& learner_cfg, const AdversarySpec& adversary_spec, std::uint64_t horizon,
                                 const GameOptions& opt) {
  if (horizon < 1) throw ConfigError("run_discrete_game: horizon must be >= 1");
  const Learner learner(learner_cfg, TimeMode::Discrete);
  const Adversary adversary(adversary_spec, learner_cfg.n);

  GameTranscript tr;
  tr.learner_kind = learner_cfg.kind;
  tr.environment = to_string(adversary_spec.kind);
  tr.seed = adversary_spec.seed;
  tr.experimental = learner.experimental();

  RegretState state = RegretState::zero(learner_cfg.n);
  std::vector<double> r;
  for (std::uint64_t round = 1; round <= horizon; ++round) {
    try {
      const SimplexDistribution p = learner.predict(state, static_cast<double>(round));
      const GainVector g = adversary.next_gain(round, p);
      g.validate();
      r = instantaneous_regret(p, g);
      tr.max_orthogonality_residual = std::max(tr.max_orthogonality_residual, std::abs(dot(p.weights(), r)));
      state.apply_round(p, g);
    } catch (...) {
      rethrow_with_context("round " + std::to_string(round) + ": ");
    }
    if (opt.stride.sampled(round, horizon)) record(tr, state, opt);
  }
  tr.final = std::move(state);
  return tr;
}

GameTranscript run_continuous_game(const LearnerConfig& learner_cfg, const BrownianPathConfig& path, std::uint64_t trial,
                                   const GameOptions& opt) {
  if (path.cov.size() != learner_cfg.n) throw ConfigError("run_continuous_game: covariance dimension differs from n");
  const Learner learner(learner_cfg, TimeMode::Continuous);
  const BrownianGainStream stream(path, trial);
  const std::uint64_t steps = stream.steps();

  GameTranscript tr;
  tr.learner_kind = learner_cfg.kind;
  tr.environment = "brownian";
  tr.seed = path.seed;
  tr.experimental = false;

  RegretState state = RegretState::zero(learner_cfg.n);
  for (std::uint64_t k = 1; k <= steps; ++k) {
    try {
      const double t = static_cast<double>(k) * path.dt;
      const SimplexDistribution p = learner.predict(state, t);
      const GainVector dg = stream.increment(k);
      const double pg = state.apply_increment(p, dg, path.dt);
      // <p, dG - <p, dG> 1> = <p, dG> (1 - sum p) up to rounding
      double orth = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) orth += p[i] * (dg.gains[i] - pg);
      tr.max_orthogonality_residual = std::max(tr.max_orthogonality_residual, std::abs(orth));
      state.time = t;
    } catch (...) {
      rethrow_with_context("step " + std::to_string(k) + ": ");
    }
    if (opt.stride.sampled(k, steps)) record(tr, state, opt);
  }
  tr.final = std::move(state);
  return tr;
}

double mwu_fixed_bound(double horizon, std::size_t n) {
  return std::sqrt(2.0 * horizon * std::log(static_cast<double>(n)));
}

double mwu_anytime_bound(double t, std::size_t n) { return 2.0 * std::sqrt(t * std::log(static_cast<double>(n))); }

double quantile_bound(double t, double epsilon) {
  return 2.0 * specfun::lambda_inv((1.0 - epsilon) / epsilon) * std::sqrt(t);
}

double independent_bound(double t, std::size_t n) {
  return specfun::lambda_inv(3.0 * static_cast<double>(n) - 1.0) * std::sqrt(t);
}

double discretization_slack(double t, double dt, std::size_t n) {
  return 5.0 * std::sqrt(dt) * std::sqrt(std::log(static_cast<double>(n)) + 1.0) * std::sqrt(t);
}

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::None:
      return "none";
    case BoundKind::MwuFixed:
      return "mwu-fixed";
    case BoundKind::MwuAnytime:
      return "mwu-anytime";
    case BoundKind::Quantile:
      return "quantile";
    case BoundKind::Independent:
      return "independent";
  }
  return "none";
}

CovarianceSpec PathSpec::covariance(std::size_t n) const {
  const int given = (rho ? 1 : 0) + (correlation.empty() ? 0 : 1) + (weights.empty() ? 0 : 1);
  if (given > 1) throw ConfigError("path: give at most one of rho, correlation, weights");
  if (rho) return CovarianceSpec::equicorrelated(n, *rho);
  if (!correlation.empty()) return CovarianceSpec::from_correlation(n, correlation);
  if (!weights.empty()) return CovarianceSpec(n, weights);
  return CovarianceSpec::identity(n);
}

void ExperimentSpec::validate() const {
  if (n < 1) throw ConfigError("n must be >= 1");
  if (learner.n != n) throw ConfigError("learner.n differs from n");
  learner.validate();
  if (adversary.has_value() == path.has_value()) throw ConfigError("exactly one of adversary and path is required");
  if (!(horizon >= 1.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be >= 1");
  if (!continuous() && horizon != std::floor(horizon)) throw ConfigError("horizon must be an integer for discrete games");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  for (double e : epsilons) {
    if (!(e > 0.0 && e <= 1.0)) throw ConfigError("epsilons must lie in (0, 1]");
  }
  if (!seeds.empty() && seeds.size() != trials) throw ConfigError("seeds must list one seed per trial");
  if (path) {
    BrownianPathConfig cfg{path->covariance(n), path->dt, horizon, 0};
    cfg.validate();
  }
}

std::uint64_t ExperimentSpec::trial_seed(std::uint64_t trial) const {
  if (!seeds.empty()) return seeds.at(trial);
  return CounterRng::mix(base_seed ^ CounterRng::mix(trial));
}

std::vector<double> ExperimentSpec::effective_epsilons() const {
  const double first = 1.0 / static_cast<double>(n);
  std::vector<double> out{first};
  for (double e : epsilons) {
    if (e != first) out.push_back(e);
  }
  return out;
}

namespace {

// lambda values are expensive relative to a row; cache per epsilon.
struct BoundTable {
  BoundKind regret_kind = BoundKind::None;
  double regret_coeff = 0.0;  // bound = coeff * sqrt(t), or constant for MwuFixed
  std::vector<double> quantile_coeff;
  bool quantile_bounds = false;
  bool continuous = false;
  double dt = 0.0;
  std::size_t n = 0;

  BoundTable(const ExperimentSpec& spec, const std::vector<double>& eps) {
    n = spec.n;
    continuous = spec.continuous();
    dt = continuous ? spec.path->dt : 0.0;
    const double ln_n = std::log(static_cast<double>(n));
    switch (spec.learner.kind) {
      case LearnerKind::MwuFixed:
        regret_kind = BoundKind::MwuFixed;
        regret_coeff = std::sqrt(2.0 * spec.learner.horizon.value_or(spec.horizon) * ln_n);
        break;
      case LearnerKind::MwuAnytime:
        regret_kind = BoundKind::MwuAnytime;
        regret_coeff = 2.0 * std::sqrt(ln_n);
        break;
      case LearnerKind::IndependentPotential:
        regret_kind = BoundKind::Independent;
        regret_coeff = specfun::lambda_inv(3.0 * static_cast<double>(n) - 1.0);
        break;
      case LearnerKind::QuantilePotential:
        quantile_bounds = true;
        for (double e : eps) quantile_coeff.push_back(2.0 * specfun::lambda_inv((1.0 - e) / e));
        break;
    }
  }

  BoundPoint at(double t, std::size_t slot) const {
    BoundPoint b;
    if (quantile_bounds) {
      b = {BoundKind::Quantile, quantile_coeff[slot] * std::sqrt(t)};
    } else if (slot == 0) {
      b.kind = regret_kind;
      b.value = regret_kind == BoundKind::MwuFixed ? regret_coeff : regret_coeff * std::sqrt(t);
    } else {
      return b;
    }
    if (continuous) b.value += discretization_slack(t, dt, n);
    return b;
  }
};

constexpr double kToleranceScale = 1e-6;
constexpr std::size_t kViolationCap = 100;

}  // namespace

BoundPoint bound_at(const ExperimentSpec& spec, double t, double epsilon, bool regret_slot) {
  const std::vector<double> eps{epsilon};
  const BoundTable table(spec, eps);
  if (table.quantile_bounds) return table.at(t, 0);
  return regret_slot ? table.at(t, 0) : BoundPoint{};
}

std::size_t default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::uint64_t count, std::size_t threads, const std::function<void(std::uint64_t)>& body) {
  threads = std::max<std::size_t>(1, std::min<std::uint64_t>(threads, count));
  std::atomic<std::uint64_t> next{0};
  std::mutex mu;
  std::uint64_t failed_index = std::numeric_limits<std::uint64_t>::max();
  std::exception_ptr failure;
  std::atomic<bool> stop{false};

  auto worker = [&] {
    while (!stop.load(std::memory_order_relaxed)) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= count) break;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
        stop = true;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

namespace {

struct TrialResult {
  std::vector<TrialRow> rows;
  double terminal_regret = 0.0;
  double orthogonality = 0.0;
};

double max_entry(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

ExperimentSummary monte_carlo(const ExperimentSpec& spec_in, std::size_t threads) {
  ExperimentSpec spec = spec_in;
  if (spec.learner.kind == LearnerKind::MwuFixed && !spec.learner.horizon) spec.learner.horizon = spec.horizon;
  spec.validate();

  const std::vector<double> eps = spec.effective_epsilons();
  const BoundTable bounds(spec, eps);

  std::optional<CovarianceSpec> cov;
  if (spec.continuous()) cov = spec.path->covariance(spec.n);

  std::vector<TrialResult> results(spec.trials);
  parallel_for(spec.trials, threads, [&](std::uint64_t trial) {
    TrialResult& res = results[trial];
    const std::uint64_t seed = spec.trial_seed(trial);
    GameOptions opt;
    opt.stride = spec.stride;
    opt.keep_states = false;
    std::vector<double> sorted;
    opt.observer = [&](const RegretState& s) {
      const double t = spec.continuous() ? s.time : static_cast<double>(s.round);
      const double regret = max_entry(s.regret);
      sorted = s.regret;
      std::sort(sorted.begin(), sorted.end(), std::greater<>());
      for (std::size_t k = 0; k < eps.size(); ++k) {
        TrialRow row;
        row.t = t;
        row.trial = trial;
        row.regret = regret;
        row.epsilon = eps[k];
        row.quantile_value = sorted[quantile_rank(eps[k], spec.n) - 1];
        const BoundPoint b = bounds.at(t, k);
        row.bound_kind = b.kind;
        row.bound_value = b.value;
        if (b.kind != BoundKind::None) {
          const double measured = b.kind == BoundKind::Quantile ? row.quantile_value : row.regret;
          row.violation = measured > b.value + kToleranceScale * std::sqrt(t);
        }
        res.rows.push_back(row);
      }
    };
    try {
      GameTranscript tr;
      if (spec.continuous()) {
        const BrownianPathConfig path{*cov, spec.path->dt, spec.horizon, seed};
        tr = run_continuous_game(spec.learner, path, trial, opt);
      } else {
        AdversarySpec adv = *spec.adversary;
        adv.seed = seed;
        tr = run_discrete_game(spec.learner, adv, static_cast<std::uint64_t>(spec.horizon), opt);
      }
      res.terminal_regret = max_entry(tr.final.regret);
      res.orthogonality = tr.max_orthogonality_residual;
    } catch (...) {
      rethrow_with_context("trial " + std::to_string(trial) + ": ");
    }
  });

  ExperimentSummary out;
  out.trials = spec.trials;
  out.epsilons = eps;
  out.tolerance_scale = kToleranceScale;
  out.slack_coefficient = spec.continuous() ? 5.0 * std::sqrt(spec.path->dt) * std::sqrt(std::log(double(spec.n)) + 1.0) : 0.0;
  out.experimental = spec.learner.kind == LearnerKind::IndependentPotential && !spec.continuous();

  // Merge in trial order so the result does not depend on scheduling.
  const std::size_t per_trial = results.front().rows.size();
  for (const auto& res : results) {
    if (res.rows.size() != per_trial) throw InternalError("monte_carlo: trials sampled different time grids");
  }
  const std::size_t n_times = per_trial / eps.size();
  out.aggregates.resize(n_times);
  double sum_terminal = 0.0;
  double sum_terminal2 = 0.0;
  for (std::uint64_t trial = 0; trial < spec.trials; ++trial) {
    const TrialResult& res = results[trial];
    sum_terminal += res.terminal_regret;
    sum_terminal2 += res.terminal_regret * res.terminal_regret;
    out.max_orthogonality_residual = std::max(out.max_orthogonality_residual, res.orthogonality);
    for (std::size_t j = 0; j < n_times; ++j) {
      AggregateRow& agg = out.aggregates[j];
      const TrialRow* rows = &res.rows[j * eps.size()];
      if (trial == 0) {
        agg.t = rows[0].t;
        agg.max_regret = -std::numeric_limits<double>::infinity();
        agg.mean_quantile.assign(eps.size(), 0.0);
        agg.bound_value.assign(eps.size(), std::numeric_limits<double>::quiet_NaN());
        agg.bound_kind.assign(eps.size(), BoundKind::None);
        for (std::size_t k = 0; k < eps.size(); ++k) {
          agg.bound_kind[k] = rows[k].bound_kind;
          if (rows[k].bound_kind != BoundKind::None) agg.bound_value[k] = rows[k].bound_value;
        }
      }
      agg.mean_regret += rows[0].regret;
      agg.max_regret = std::max(agg.max_regret, rows[0].regret);
      for (std::size_t k = 0; k < eps.size(); ++k) agg.mean_quantile[k] += rows[k].quantile_value;
    }
    for (const TrialRow& row : res.rows) {
      out.rows.push_back(row);
      if (row.violation) {
        ++out.violation_count;
        if (out.violations.size() < kViolationCap) out.violations.push_back(row);
      }
    }
  }
  const double m = static_cast<double>(spec.trials);
  for (AggregateRow& agg : out.aggregates) {
    agg.mean_regret /= m;
    for (double& q : agg.mean_quantile) q /= m;
  }
  out.terminal_mean_regret = sum_terminal / m;
  if (spec.trials > 1) {
    const double var = std::max(0.0, (sum_terminal2 - m * out.terminal_mean_regret * out.terminal_mean_regret) / (m - 1.0));
    out.terminal_regret_stderr = std::sqrt(var / m);
  }
  return out;
}

MaxOfGaussians max_of_gaussians(std::size_t n, std::uint64_t trials, std::uint64_t seed, std::size_t threads) {
  if (n < 1 || trials < 1) throw ConfigError("max_of_gaussians: n and trials must be >= 1");
  std::vector<double> maxima(trials);
  parallel_for(trials, threads, [&](std::uint64_t trial) {
    const CounterRng rng(seed, trial);
    std::vector<double> z(n);
    rng.gaussian_vector(0, n, z);
    maxima[trial] = max_entry(z);
  });
  double sum = 0.0;
  double sum2 = 0.0;
  for (double v : maxima) {
    sum += v;
    sum2 += v * v;
  }
  MaxOfGaussians out;
  const double m = static_cast<double>(trials);
  out.mean = sum / m;
  if (trials > 1) out.stderr_mean = std::sqrt(std::max(0.0, (sum2 - m * out.mean * out.mean) / (m - 1.0)) / m);
  out.reference = std::sqrt(2.0 * std::log(static_cast<double>(n)));
  return out;
}

}  // namespace experts
