#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "experts/core.hpp"
#include "experts/counter_rng.hpp"

namespace experts {

enum class AdversaryKind { UniformRandom, FixedSequence, SingleLeader, Alternating };

std::string to_string(AdversaryKind kind);
AdversaryKind adversary_kind_from_string(const std::string& name);

// Rows of discrete gains, one per round.
using GainTable = std::vector<std::vector<double>>;

struct AdversarySpec {
  AdversaryKind kind = AdversaryKind::UniformRandom;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> sequence_path;
  // In-memory alternative to sequence_path for fixed-sequence.
  std::shared_ptr<const GainTable> sequence;
  std::size_t leader = 0;
};

// Reads the fixed-sequence CSV format: header g1,...,gn then one row of n
// values in [-1, 1] per round. Errors carry the 1-based line number.
GainTable read_gain_table(const std::filesystem::path& path, std::size_t n);
void write_gain_table(const std::filesystem::path& path, const GainTable& table);

// Entries i.i.d. uniform on [-1, 1].
GainTable random_gain_table(std::size_t n, std::size_t rounds, std::uint64_t seed);

class Adversary {
 public:
  Adversary(AdversarySpec spec, std::size_t n);

  // Gains for `round` (>= 1), chosen after seeing the player's distribution.
  GainVector next_gain(std::uint64_t round, const SimplexDistribution& player) const;

  const AdversarySpec& spec() const { return spec_; }
  std::size_t size() const { return n_; }

 private:
  AdversarySpec spec_;
  std::size_t n_;
  std::shared_ptr<const GainTable> table_;
  CounterRng rng_;
};

// Column i of the weight matrix is w^(i); Sigma = W^T W.
class CovarianceSpec {
 public:
  // Validates unit column norms (to 1e-10); throws ConfigError otherwise.
  CovarianceSpec(std::size_t n, std::vector<double> weight_matrix_row_major);

  static CovarianceSpec identity(std::size_t n);
  // W from the Cholesky factor of a correlation matrix (unit diagonal, PSD).
  static CovarianceSpec from_correlation(std::size_t n, const std::vector<double>& sigma_row_major);
  // Equicorrelated experts: Sigma_ij = rho for i != j.
  static CovarianceSpec equicorrelated(std::size_t n, double rho);

  std::size_t size() const { return n_; }
  bool is_identity() const { return identity_; }
  double weight(std::size_t row, std::size_t col) const { return w_[row * n_ + col]; }
  std::vector<double> sigma() const;

  // dG_i = <w^(i), dB>
  void apply(const std::vector<double>& dB, std::vector<double>& dG) const;

 private:
  std::size_t n_;
  std::vector<double> w_;
  bool identity_ = false;
};

struct BrownianPathConfig {
  CovarianceSpec cov;
  double dt = 1e-3;
  double horizon = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  std::uint64_t steps() const;  // ceil(horizon / dt)
};

// Euler increments dG_k = W^T dB_k with dB_k ~ N(0, dt I). Step k is a pure
// function of (seed, trial, k), so streams are reproducible and independent
// across trials.
class BrownianGainStream {
 public:
  BrownianGainStream(BrownianPathConfig cfg, std::uint64_t trial = 0);

  std::uint64_t steps() const { return steps_; }
  std::uint64_t position() const { return next_; }
  bool done() const { return next_ > steps_; }

  // Increment for step k in 1..steps().
  GainVector increment(std::uint64_t k) const;

  // Sequential interface; std::nullopt once all steps were emitted.
  std::optional<GainVector> next();

 private:
  BrownianPathConfig cfg_;
  CounterRng rng_;
  std::uint64_t steps_;
  std::uint64_t next_ = 1;
  double sqrt_dt_;
};

}  // namespace experts
