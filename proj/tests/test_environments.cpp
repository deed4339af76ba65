#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "doctest.h"
#include "experts/environments.hpp"
#include "experts/errors.hpp"

using namespace experts;
namespace fs = std::filesystem;

namespace {

fs::path data(const std::string& name) { return fs::path(EXPERTS_TEST_DATA_DIR) / name; }

fs::path temp_file(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("experts_env_" + name);
  std::ofstream(p) << text;
  return p;
}

std::string config_message(const fs::path& p, std::size_t n) {
  try {
    read_gain_table(p, n);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("adversary names round-trip") {
  for (auto k : {AdversaryKind::UniformRandom, AdversaryKind::FixedSequence, AdversaryKind::SingleLeader, AdversaryKind::Alternating}) {
    CHECK(adversary_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(adversary_kind_from_string("oblivious"), ConfigError);
}

TEST_CASE("uniform-random adversary is a pure function of (seed, round)") {
  const Adversary a(AdversarySpec{AdversaryKind::UniformRandom, 17}, 6);
  const Adversary b(AdversarySpec{AdversaryKind::UniformRandom, 17}, 6);
  const Adversary c(AdversarySpec{AdversaryKind::UniformRandom, 18}, 6);
  const auto p = SimplexDistribution::uniform(6);
  int differ = 0;
  int plus = 0, total = 0;
  for (std::uint64_t r = 1; r <= 2000; ++r) {
    const auto ga = a.next_gain(r, p);
    CHECK(ga.gains == b.next_gain(r, p).gains);
    if (ga.gains != c.next_gain(r, p).gains) ++differ;
    for (double g : ga.gains) {
      CHECK((g == 1.0 || g == -1.0));
      plus += g > 0;
      ++total;
    }
  }
  CHECK(differ > 1900);
  // 12000 fair coins: mean within 4 standard errors
  CHECK(std::abs(plus - total / 2.0) < 4.0 * std::sqrt(total / 4.0));
  // order of queries is irrelevant
  CHECK(a.next_gain(5, p).gains == a.next_gain(5, p).gains);
}

TEST_CASE("single-leader and alternating adversaries") {
  const Adversary lead(AdversarySpec{AdversaryKind::SingleLeader, 0, std::nullopt, nullptr, 2}, 4);
  const auto g = lead.next_gain(1, SimplexDistribution::uniform(4));
  CHECK(g.gains == std::vector<double>{0, 0, 1, 0});
  CHECK_THROWS_AS(Adversary(AdversarySpec{AdversaryKind::SingleLeader, 0, std::nullopt, nullptr, 4}, 4), ConfigError);

  const Adversary alt(AdversarySpec{AdversaryKind::Alternating}, 3);
  const auto h = alt.next_gain(1, SimplexDistribution({0.5, 0.2, 0.3}));
  CHECK(h.gains == std::vector<double>{-1, 1, -1});
}

TEST_CASE("fixed-sequence adversary echoes the file and then ends") {
  const Adversary a(AdversarySpec{AdversaryKind::FixedSequence, 0, data("three_rounds_n2.csv")}, 2);
  const auto p = SimplexDistribution::uniform(2);
  CHECK(a.next_gain(1, p).gains == std::vector<double>{1, -1});
  CHECK(a.next_gain(2, p).gains == std::vector<double>{-1, 1});
  CHECK(a.next_gain(3, p).gains == std::vector<double>{0.5, 0.25});
  CHECK_THROWS_AS(a.next_gain(4, p), EndOfSequence);

  const auto table = read_gain_table(data("zero_gains_n3.csv"), 3);
  CHECK(table.size() == 5);
  CHECK_THROWS_AS(Adversary(AdversarySpec{AdversaryKind::FixedSequence}, 2), ConfigError);
}

TEST_CASE("gain table errors carry line numbers") {
  CHECK(config_message(temp_file("range.csv", "g1,g2\n0,0\n0.5,1.5\n"), 2).find(".csv:3: ") != std::string::npos);
  CHECK(config_message(temp_file("width.csv", "g1,g2\n0,0,0\n"), 2).find(".csv:2: ") != std::string::npos);
  CHECK(config_message(temp_file("text.csv", "g1,g2\n0,abc\n"), 2).find(".csv:2: ") != std::string::npos);
  CHECK(config_message(temp_file("header.csv", "a,b\n0,0\n"), 2).find(".csv:1: ") != std::string::npos);
  CHECK_FALSE(config_message(fs::temp_directory_path() / "experts_env_missing.csv", 2).empty());
}

TEST_CASE("gain table write/read round trip") {
  const GainTable t = random_gain_table(4, 50, 99);
  for (const auto& row : t) {
    for (double g : row) CHECK((g >= -1.0 && g <= 1.0));
  }
  const fs::path p = fs::temp_directory_path() / "experts_env_roundtrip.csv";
  write_gain_table(p, t);
  CHECK(read_gain_table(p, 4) == t);
  CHECK(random_gain_table(4, 50, 99) == t);
}

TEST_CASE("covariance construction") {
  CHECK(CovarianceSpec::identity(3).is_identity());
  CHECK_THROWS_AS(CovarianceSpec(2, {1.0, 0.0, 0.5, 1.0}), ConfigError);  // column 0 has norm sqrt(1.25)
  CHECK_THROWS_AS(CovarianceSpec(2, {1.0, 0.0}), ConfigError);
  const double c = std::sqrt(0.5);
  const CovarianceSpec w(2, {1.0, c, 0.0, c});
  const auto s = w.sigma();
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == doctest::Approx(c));
  CHECK(s[3] == doctest::Approx(1.0));

  const auto eq = CovarianceSpec::equicorrelated(4, 0.3).sigma();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) CHECK(eq[i * 4 + j] == doctest::Approx(i == j ? 1.0 : 0.3).epsilon(1e-12));
  }
  CHECK_THROWS_AS(CovarianceSpec::equicorrelated(3, -0.9), ConfigError);
  CHECK_THROWS_AS(CovarianceSpec::from_correlation(2, {1.0, 2.0, 2.0, 1.0}), ConfigError);
}

TEST_CASE("Brownian increments: identity covariance") {
  BrownianPathConfig cfg{CovarianceSpec::identity(3), 0.01, 2000.0, 5};
  CHECK(cfg.steps() == 200000);
  BrownianGainStream s(cfg);
  const std::uint64_t m = s.steps();
  double sum[3] = {0, 0, 0}, sq[3] = {0, 0, 0}, cross = 0.0;
  for (std::uint64_t k = 1; k <= m; ++k) {
    const auto g = s.increment(k);
    for (int i = 0; i < 3; ++i) {
      sum[i] += g.gains[i];
      sq[i] += g.gains[i] * g.gains[i];
    }
    cross += g.gains[0] * g.gains[1];
  }
  const double dt = 0.01;
  for (int i = 0; i < 3; ++i) {
    const double var = sq[i] / m;
    // Var of dB^2 is 2 dt^2
    CHECK(std::abs(var - dt) < 3.0 * std::sqrt(2.0 / m) * dt);
    CHECK(std::abs(sum[i] / m) < 3.0 * std::sqrt(dt / m));
  }
  CHECK(std::abs(cross / m) < 3.0 * dt / std::sqrt(static_cast<double>(m)));
}

TEST_CASE("Brownian increments: correlation 0.5 over 1e6 steps") {
  BrownianPathConfig cfg{CovarianceSpec::equicorrelated(2, 0.5), 1e-3, 1000.0, 77};
  BrownianGainStream s(cfg, 3);
  double a = 0, b = 0, ab = 0;
  std::uint64_t m = 0;
  while (auto g = s.next()) {
    a += g->gains[0] * g->gains[0];
    b += g->gains[1] * g->gains[1];
    ab += g->gains[0] * g->gains[1];
    ++m;
  }
  CHECK(m == 1000000);
  CHECK(s.done());
  CHECK(std::abs(ab / std::sqrt(a * b) - 0.5) < 0.01);
}

TEST_CASE("Brownian streams are reproducible and differ across trials") {
  BrownianPathConfig cfg{CovarianceSpec::identity(2), 0.1, 1.0, 1};
  const BrownianGainStream s0(cfg, 0), s0b(cfg, 0), s1(cfg, 1);
  CHECK(s0.steps() == 10);
  CHECK(s0.increment(4).gains == s0b.increment(4).gains);
  CHECK(s0.increment(4).gains != s1.increment(4).gains);
  BrownianPathConfig bad{CovarianceSpec::identity(2), 0.0, 1.0, 1};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  BrownianPathConfig odd{CovarianceSpec::identity(2), 0.3, 1.0, 1};
  CHECK(odd.steps() == 4);
}
