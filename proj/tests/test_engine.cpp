#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "experts/engine.hpp"
#include "experts/errors.hpp"
#include "experts/specfun.hpp"

using namespace experts;

namespace {

double max_regret(const RegretState& s) { return *std::max_element(s.regret.begin(), s.regret.end()); }

ExperimentSpec discrete_spec(LearnerKind kind, AdversaryKind adv, std::size_t n, double horizon, std::uint64_t trials) {
  ExperimentSpec spec;
  spec.learner = LearnerConfig{kind, n, std::nullopt, std::nullopt};
  if (kind == LearnerKind::MwuFixed) spec.learner.horizon = horizon;
  spec.adversary = AdversarySpec{adv};
  spec.n = n;
  spec.horizon = horizon;
  spec.trials = trials;
  spec.base_seed = 1234;
  return spec;
}

ExperimentSpec continuous_spec(LearnerKind kind, std::size_t n, double dt, double horizon, std::uint64_t trials) {
  ExperimentSpec spec;
  spec.learner = LearnerConfig{kind, n, std::nullopt, std::nullopt};
  spec.path = PathSpec{dt};
  spec.n = n;
  spec.horizon = horizon;
  spec.trials = trials;
  spec.base_seed = 99;
  return spec;
}

}  // namespace

TEST_CASE("stride sampling points") {
  CHECK(Stride::pow2().points(10) == std::vector<std::uint64_t>{1, 2, 4, 8, 10});
  CHECK(Stride::pow2().points(8) == std::vector<std::uint64_t>{1, 2, 4, 8});
  CHECK(Stride::each(3).points(10) == std::vector<std::uint64_t>{3, 6, 9, 10});
  CHECK(Stride::each(1).points(3) == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(Stride::pow2().sampled(16, 100));
  CHECK_FALSE(Stride::pow2().sampled(12, 100));
  CHECK(Stride::pow2().sampled(100, 100));
  CHECK_FALSE(Stride::pow2().sampled(0, 100));
  CHECK_THROWS_AS(Stride::each(0), ConfigError);
}

TEST_CASE("bound curves") {
  CHECK(mwu_fixed_bound(100.0, 2) == doctest::Approx(std::sqrt(200.0 * std::log(2.0))));
  CHECK(mwu_anytime_bound(100.0, 4) == doctest::Approx(20.0 * std::sqrt(std::log(4.0))));
  CHECK(quantile_bound(4.0, 0.5) == doctest::Approx(4.0 * specfun::lambda_inv(1.0)));
  CHECK(independent_bound(9.0, 2) == doctest::Approx(3.0 * specfun::lambda_inv(5.0)));
  CHECK(discretization_slack(4.0, 0.01, 1) == doctest::Approx(5.0 * 0.1 * 2.0));
}

TEST_CASE("horizon 1 gives |R| <= 2") {
  for (auto kind : {LearnerKind::MwuAnytime, LearnerKind::QuantilePotential, LearnerKind::IndependentPotential}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto tr = run_discrete_game(LearnerConfig{kind, 5, std::nullopt, std::nullopt},
                                        AdversarySpec{AdversaryKind::UniformRandom, seed}, 1);
      REQUIRE(tr.states.size() == 1);
      for (double r : tr.final.regret) CHECK(std::abs(r) <= 2.0);
    }
  }
}

TEST_CASE("zero gains leave the regret at zero") {
  const auto table = std::make_shared<const GainTable>(GainTable(40, std::vector<double>(3, 0.0)));
  const auto tr = run_discrete_game(LearnerConfig{LearnerKind::QuantilePotential, 3, std::nullopt, std::nullopt},
                                    AdversarySpec{AdversaryKind::FixedSequence, 0, std::nullopt, table}, 40,
                                    GameOptions{Stride::each(1)});
  CHECK(tr.states.size() == 40);
  for (const auto& s : tr.states) {
    for (double r : s.regret) CHECK(r == 0.0);
  }
}

TEST_CASE("game transcript bookkeeping") {
  std::uint64_t seen = 0;
  GameOptions opt{Stride::pow2(), true, [&](const RegretState&) { ++seen; }};
  const auto tr = run_discrete_game(LearnerConfig{LearnerKind::MwuAnytime, 4, std::nullopt, std::nullopt},
                                    AdversarySpec{AdversaryKind::UniformRandom, 3}, 100, opt);
  CHECK(seen == Stride::pow2().points(100).size());
  CHECK(tr.states.size() == Stride::pow2().points(100).size());
  CHECK(tr.states.back().round == 100);
  CHECK(tr.final.round == 100);
  CHECK(tr.max_orthogonality_residual <= 1e-12);
  CHECK(tr.max_identity_residual <= 1e-10);
  CHECK(tr.environment == "uniform-random");
  CHECK_FALSE(tr.experimental);
}

TEST_CASE("running past the end of a fixed sequence reports the round") {
  const auto table = std::make_shared<const GainTable>(GainTable(3, std::vector<double>{1.0, -1.0}));
  try {
    run_discrete_game(LearnerConfig{LearnerKind::MwuAnytime, 2, std::nullopt, std::nullopt},
                      AdversarySpec{AdversaryKind::FixedSequence, 0, std::nullopt, table}, 5);
    FAIL("expected EndOfSequence");
  } catch (const EndOfSequence& e) {
    CHECK(std::string(e.what()).find("round 4") != std::string::npos);
  }
}

TEST_CASE("single leader: max regret stays under the eps = 1/n quantile bound") {
  for (std::size_t n : {2u, 4u, 16u}) {
    const auto tr = run_discrete_game(LearnerConfig{LearnerKind::QuantilePotential, n, std::nullopt, std::nullopt},
                                      AdversarySpec{AdversaryKind::SingleLeader, 0, std::nullopt, nullptr, n - 1}, 3000,
                                      GameOptions{Stride::each(1)});
    int bad = 0;
    for (const auto& s : tr.states) {
      const double t = static_cast<double>(s.round);
      if (max_regret(s) > quantile_bound(t, 1.0 / static_cast<double>(n)) + 1e-6 * std::sqrt(t)) ++bad;
    }
    CHECK(bad == 0);
    CHECK(tr.final.regret[n - 1] > 0.0);
  }
}

TEST_CASE("anytime MWU with n = 16, T = 1e4 has no violations") {
  auto spec = discrete_spec(LearnerKind::MwuAnytime, AdversaryKind::UniformRandom, 16, 10000, 3);
  spec.stride = Stride::each(1);
  const auto sum = monte_carlo(spec, 1);
  CHECK(sum.violation_count == 0);
  CHECK(sum.aggregates.size() == 10000);
}

TEST_CASE("continuous game with one expert has zero regret") {
  BrownianPathConfig cfg{CovarianceSpec::identity(1), 0.01, 2.0, 4};
  const auto tr = run_continuous_game(LearnerConfig{LearnerKind::IndependentPotential, 1, std::nullopt, std::nullopt}, cfg, 0,
                                      GameOptions{Stride::each(1)});
  CHECK(tr.states.size() == 200);
  for (const auto& s : tr.states) CHECK(std::abs(s.regret[0]) <= 1e-12);
  CHECK(tr.final.time == doctest::Approx(2.0));
}

TEST_CASE("continuous terminal regret is stable when dt is halved") {
  const auto a = monte_carlo(continuous_spec(LearnerKind::IndependentPotential, 4, 0.01, 1.0, 400), 1);
  const auto b = monte_carlo(continuous_spec(LearnerKind::IndependentPotential, 4, 0.005, 1.0, 400), 1);
  const double se = std::hypot(a.terminal_regret_stderr, b.terminal_regret_stderr);
  CHECK(se > 0.0);
  CHECK(std::abs(a.terminal_mean_regret - b.terminal_mean_regret) < 4.0 * se);
}

TEST_CASE("a single trial aggregates to itself") {
  auto spec = discrete_spec(LearnerKind::QuantilePotential, AdversaryKind::UniformRandom, 4, 200, 1);
  spec.epsilons = {0.5};
  const auto sum = monte_carlo(spec, 1);
  for (const auto& agg : sum.aggregates) {
    CHECK(agg.mean_regret == agg.max_regret);
  }
  // eps = 1/n is always present, ahead of the requested levels
  REQUIRE(sum.epsilons.size() == 2);
  CHECK(sum.epsilons[0] == doctest::Approx(0.25));
  CHECK(sum.terminal_regret_stderr == 0.0);
}

TEST_CASE("monte carlo is identical across thread counts") {
  auto spec = discrete_spec(LearnerKind::QuantilePotential, AdversaryKind::UniformRandom, 8, 500, 12);
  spec.epsilons = {0.25, 0.5};
  const auto one = monte_carlo(spec, 1);
  const auto four = monte_carlo(spec, 4);
  REQUIRE(one.rows.size() == four.rows.size());
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    CHECK(one.rows[i].regret == four.rows[i].regret);
    CHECK(one.rows[i].quantile_value == four.rows[i].quantile_value);
  }
  CHECK(one.terminal_mean_regret == four.terminal_mean_regret);
}

TEST_CASE("trial seeds") {
  auto spec = discrete_spec(LearnerKind::MwuAnytime, AdversaryKind::UniformRandom, 2, 10, 3);
  CHECK(spec.trial_seed(0) != spec.trial_seed(1));
  spec.seeds = {5, 6, 7};
  CHECK(spec.trial_seed(1) == 6);
}

TEST_CASE("experiment spec validation") {
  auto spec = discrete_spec(LearnerKind::MwuAnytime, AdversaryKind::UniformRandom, 2, 10, 0);
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = discrete_spec(LearnerKind::MwuAnytime, AdversaryKind::UniformRandom, 2, 10, 1);
  spec.epsilons = {1.5};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = discrete_spec(LearnerKind::MwuAnytime, AdversaryKind::UniformRandom, 2, 10, 2);
  spec.seeds = {1};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("parallel_for covers every index and rethrows the lowest failure") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(1000, 4, [&](std::uint64_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  try {
    parallel_for(200, 4, [](std::uint64_t i) {
      if (i == 37 || i == 150) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "37");
  }
}

TEST_CASE("max of Gaussians is reproducible") {
  const auto a = max_of_gaussians(8, 2000, 5, 1);
  const auto b = max_of_gaussians(8, 2000, 5, 3);
  CHECK(a.mean == b.mean);
  CHECK(a.reference == doctest::Approx(std::sqrt(2.0 * std::log(8.0))));
  CHECK(a.mean < a.reference);
}
