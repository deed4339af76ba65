#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace experts::verify {

struct Violation {
  std::string point;
  double margin = 0.0;
};

// margin = LHS - RHS oriented so that the inequality reads margin >= 0. Where
// the two sides can be astronomically large the margin is divided by
// max(1, |LHS| + |RHS|) (in units where the common exponential shift is 1),
// so the tolerance acts relative to the magnitude of the terms.
struct SweepReport {
  std::string lemma_id;
  std::uint64_t points_checked = 0;
  double worst_margin = 0.0;
  std::string worst_point;
  double tolerance = 0.0;
  bool strict = false;  // margin == -tolerance also counts as a violation
  std::vector<Violation> violations;  // capped; violation_count is exact
  std::uint64_t violation_count = 0;

  explicit SweepReport(std::string id = {}, double tol = 0.0, bool strict_ = false);

  bool passed() const { return violation_count == 0; }
  void add(double margin, const std::function<std::string()>& describe);
  void merge(const SweepReport& other);
  nlohmann::json to_json() const;
};

// Margin of a >= b, with both sides given as multiples of e^{shift}.
double scaled_margin(double lhs, double rhs, double shift);

// phi(t, x+1) + phi(t, x-1) - 2 phi(t-1, x), scaled as above.
double discrete_bhe_margin(double t, double x);
// M0((x+z)^2/2) + M0((x-z)^2/2) - 2 sqrt(1-z^2) M0(x^2 / (2 (1 - z^2))).
double m0_convolution_margin(double z, double x);
// 1 - M0(x^2/2) - exp(x^2/2) / (x^2 + 1 + 2/x^2).
double expx2_margin(double x);
// (e^{z^2} - 1)/z - (sqrt(pi)/2) erfi(z), relative to the left side.
double erfi_bound_margin(double z);

SweepReport check_discrete_bhe(std::size_t threads = 1);
SweepReport check_m0_convolution();
SweepReport check_discrete_ito_lower_bound(std::uint64_t seed = 7);
SweepReport check_potential_monotone_in_games(std::size_t threads = 1);
SweepReport check_expx2();
SweepReport check_lambdabound();
SweepReport check_erfi_bound();
SweepReport check_specfun_lemmas();
SweepReport check_continuous_bhe();
SweepReport check_covariance_identity(std::uint64_t steps = 1000000, std::uint64_t seed = 11);

struct LemmaEntry {
  std::string name;
  std::function<SweepReport(std::size_t threads)> run;
};

// Names accepted by `verify --lemma`, in default run order.
const std::vector<LemmaEntry>& registry();
std::vector<std::string> lemma_names();

// Throws ConfigError for unknown names. Empty selection runs everything.
std::vector<SweepReport> run_lemmas(const std::vector<std::string>& names, std::size_t threads);

}  // namespace experts::verify
