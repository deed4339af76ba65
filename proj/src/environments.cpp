#include "experts/environments.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace experts {

std::string to_string(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::UniformRandom:
      return "uniform-random";
    case AdversaryKind::FixedSequence:
      return "fixed-sequence";
    case AdversaryKind::SingleLeader:
      return "single-leader";
    case AdversaryKind::Alternating:
      return "alternating";
  }
  return "unknown";
}

AdversaryKind adversary_kind_from_string(const std::string& name) {
  if (name == "uniform-random") return AdversaryKind::UniformRandom;
  if (name == "fixed-sequence") return AdversaryKind::FixedSequence;
  if (name == "single-leader") return AdversaryKind::SingleLeader;
  if (name == "alternating") return AdversaryKind::Alternating;
  throw ConfigError("unknown adversary kind '" + name + "'");
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

GainTable read_gain_table(const std::filesystem::path& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open gain sequence '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& what) {
    throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + what);
  };

  if (!std::getline(in, line)) {
    line_no = 1;
    fail("missing header");
  }
  ++line_no;
  const auto header = split_commas(trim(line));
  if (header.size() != n) fail("header has " + std::to_string(header.size()) + " columns, expected " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (trim(header[i]) != "g" + std::to_string(i + 1)) fail("header column " + std::to_string(i + 1) + " must be g" + std::to_string(i + 1));
  }

  GainTable table;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != n) fail("expected " + std::to_string(n) + " values, found " + std::to_string(cells.size()));
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string cell = trim(cells[i]);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size()) fail("column " + std::to_string(i + 1) + ": not a number '" + cell + "'");
      if (!(v >= -1.0 && v <= 1.0)) fail("column " + std::to_string(i + 1) + ": gain " + cell + " outside [-1, 1]");
      row[i] = v;
    }
    table.push_back(std::move(row));
  }
  return table;
}

void write_gain_table(const std::filesystem::path& path, const GainTable& table) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write gain sequence '" + path.string() + "'");
  const std::size_t n = table.empty() ? 0 : table.front().size();
  for (std::size_t i = 0; i < n; ++i) out << (i ? "," : "") << 'g' << (i + 1);
  out << '\n';
  char buf[32];
  for (const auto& row : table) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      out << (i ? "," : "") << buf;
    }
    out << '\n';
  }
}

GainTable random_gain_table(std::size_t n, std::size_t rounds, std::uint64_t seed) {
  const CounterRng rng(seed, 0x5eedULL);
  GainTable table(rounds, std::vector<double>(n));
  for (std::size_t r = 0; r < rounds; ++r) {
    for (std::size_t i = 0; i < n; ++i) table[r][i] = 2.0 * rng.uniform(r + 1, i) - 1.0;
  }
  return table;
}

Adversary::Adversary(AdversarySpec spec, std::size_t n) : spec_(std::move(spec)), n_(n), rng_(spec_.seed) {
  if (n_ == 0) throw ConfigError("adversary: n must be >= 1");
  if (spec_.kind == AdversaryKind::FixedSequence) {
    if (spec_.sequence) {
      table_ = spec_.sequence;
    } else if (spec_.sequence_path) {
      table_ = std::make_shared<const GainTable>(read_gain_table(*spec_.sequence_path, n_));
    } else {
      throw ConfigError("adversary: fixed-sequence needs a sequence file");
    }
    for (std::size_t r = 0; r < table_->size(); ++r) {
      const auto& row = (*table_)[r];
      if (row.size() != n_) throw ConfigError("adversary: sequence row " + std::to_string(r + 1) + " has wrong width");
      for (double g : row) {
        if (!(g >= -1.0 && g <= 1.0)) throw ConfigError("adversary: sequence row " + std::to_string(r + 1) + " has a gain outside [-1, 1]");
      }
    }
  }
  if (spec_.kind == AdversaryKind::SingleLeader && spec_.leader >= n_) {
    throw ConfigError("adversary: leader index out of range");
  }
}

GainVector Adversary::next_gain(std::uint64_t round, const SimplexDistribution& player) const {
  if (round < 1) throw DomainError("next_gain: round must be >= 1");
  GainVector g;
  g.kind = GainKind::Discrete;
  g.gains.assign(n_, 0.0);
  switch (spec_.kind) {
    case AdversaryKind::UniformRandom:
      for (std::size_t i = 0; i < n_; ++i) g.gains[i] = rng_.coin(round, i) ? 1.0 : -1.0;
      break;
    case AdversaryKind::FixedSequence:
      if (round > table_->size()) {
        throw EndOfSequence("fixed gain sequence has " + std::to_string(table_->size()) + " rounds; round " +
                            std::to_string(round) + " requested");
      }
      g.gains = (*table_)[round - 1];
      break;
    case AdversaryKind::SingleLeader:
      g.gains[spec_.leader] = 1.0;
      break;
    case AdversaryKind::Alternating: {
      if (player.size() != n_) throw DomainError("next_gain: player distribution has wrong dimension");
      std::size_t weakest = 0;
      for (std::size_t i = 1; i < n_; ++i) {
        if (player[i] < player[weakest]) weakest = i;
      }
      for (std::size_t i = 0; i < n_; ++i) g.gains[i] = i == weakest ? 1.0 : -1.0;
      break;
    }
  }
  return g;
}

CovarianceSpec::CovarianceSpec(std::size_t n, std::vector<double> w) : n_(n), w_(std::move(w)) {
  if (n_ == 0) throw ConfigError("covariance: n must be >= 1");
  if (w_.size() != n_ * n_) throw ConfigError("covariance: weight matrix must be n x n");
  bool ident = true;
  for (std::size_t col = 0; col < n_; ++col) {
    double norm2 = 0.0;
    for (std::size_t row = 0; row < n_; ++row) {
      const double v = w_[row * n_ + col];
      if (!std::isfinite(v)) throw ConfigError("covariance: non-finite weight");
      norm2 += v * v;
      if (v != (row == col ? 1.0 : 0.0)) ident = false;
    }
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-10) {
      throw ConfigError("covariance: column " + std::to_string(col + 1) + " of W has norm " + std::to_string(std::sqrt(norm2)) +
                        ", expected 1");
    }
  }
  identity_ = ident;
}

CovarianceSpec CovarianceSpec::identity(std::size_t n) {
  std::vector<double> w(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) w[i * n + i] = 1.0;
  return CovarianceSpec(n, std::move(w));
}

CovarianceSpec CovarianceSpec::from_correlation(std::size_t n, const std::vector<double>& sigma) {
  if (sigma.size() != n * n) throw ConfigError("covariance: correlation matrix must be n x n");
  // Sigma = L L^T; W = L^T has columns with norm sqrt(Sigma_ii) = 1.
  std::vector<double> L(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (std::abs(sigma[j * n + j] - 1.0) > 1e-12) throw ConfigError("covariance: correlation matrix needs a unit diagonal");
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(sigma[i * n + j] - sigma[j * n + i]) > 1e-12) throw ConfigError("covariance: correlation matrix is not symmetric");
    }
    double d = sigma[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= L[j * n + k] * L[j * n + k];
    if (d < -1e-12) throw ConfigError("covariance: correlation matrix is not positive semi-definite");
    const double ljj = std::sqrt(std::max(d, 0.0));
    L[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = sigma[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
      L[i * n + j] = ljj > 0.0 ? s / ljj : 0.0;
    }
  }
  std::vector<double> w(n * n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) w[r * n + c] = L[c * n + r];
  }
  // Renormalise columns so rounding in the factorisation cannot trip the
  // unit-norm check.
  for (std::size_t c = 0; c < n; ++c) {
    double norm2 = 0.0;
    for (std::size_t r = 0; r < n; ++r) norm2 += w[r * n + c] * w[r * n + c];
    const double norm = std::sqrt(norm2);
    if (norm == 0.0) throw ConfigError("covariance: degenerate correlation matrix");
    for (std::size_t r = 0; r < n; ++r) w[r * n + c] /= norm;
  }
  return CovarianceSpec(n, std::move(w));
}

CovarianceSpec CovarianceSpec::equicorrelated(std::size_t n, double rho) {
  std::vector<double> sigma(n * n, rho);
  for (std::size_t i = 0; i < n; ++i) sigma[i * n + i] = 1.0;
  return from_correlation(n, sigma);
}

std::vector<double> CovarianceSpec::sigma() const {
  std::vector<double> s(n_ * n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < n_; ++k) v += w_[k * n_ + i] * w_[k * n_ + j];
      s[i * n_ + j] = v;
    }
  }
  return s;
}

void CovarianceSpec::apply(const std::vector<double>& dB, std::vector<double>& dG) const {
  dG.resize(n_);
  if (identity_) {
    std::copy(dB.begin(), dB.begin() + static_cast<std::ptrdiff_t>(n_), dG.begin());
    return;
  }
  for (std::size_t i = 0; i < n_; ++i) {
    double v = 0.0;
    for (std::size_t k = 0; k < n_; ++k) v += w_[k * n_ + i] * dB[k];
    dG[i] = v;
  }
}

void BrownianPathConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("path: dt must be positive");
  if (!(horizon >= dt) || !std::isfinite(horizon)) throw ConfigError("path: horizon must be >= dt");
}

std::uint64_t BrownianPathConfig::steps() const {
  const double ratio = horizon / dt;
  const double nearest = std::round(ratio);
  // horizon = k * dt up to rounding counts as exactly k steps
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)) return static_cast<std::uint64_t>(nearest);
  return static_cast<std::uint64_t>(std::ceil(ratio));
}

BrownianGainStream::BrownianGainStream(BrownianPathConfig cfg, std::uint64_t trial)
    : cfg_(std::move(cfg)), rng_(cfg_.seed, trial), steps_(0), sqrt_dt_(0.0) {
  cfg_.validate();
  steps_ = cfg_.steps();
  sqrt_dt_ = std::sqrt(cfg_.dt);
}

GainVector BrownianGainStream::increment(std::uint64_t k) const {
  const std::size_t n = cfg_.cov.size();
  std::vector<double> dB(n);
  rng_.gaussian_vector(k, n, dB);
  for (double& v : dB) v *= sqrt_dt_;
  GainVector g;
  g.kind = GainKind::ContinuousIncrement;
  cfg_.cov.apply(dB, g.gains);
  return g;
}

std::optional<GainVector> BrownianGainStream::next() {
  if (done()) return std::nullopt;
  return increment(next_++);
}

}  // namespace experts
