#include "experts/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "experts/counter_rng.hpp"
#include "experts/engine.hpp"
#include "experts/learners.hpp"
#include "experts/specfun.hpp"

namespace experts::verify {

namespace {
constexpr std::size_t kViolationCap = 50;

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}
}  // namespace

SweepReport::SweepReport(std::string id, double tol, bool strict_)
    : lemma_id(std::move(id)), worst_margin(std::numeric_limits<double>::infinity()), tolerance(tol), strict(strict_) {}

void SweepReport::add(double margin, const std::function<std::string()>& describe) {
  ++points_checked;
  const bool bad = std::isnan(margin) || (strict ? margin <= -tolerance : margin < -tolerance);
  if (std::isnan(margin) || margin < worst_margin) {
    worst_margin = std::isnan(margin) ? -std::numeric_limits<double>::infinity() : margin;
    worst_point = describe();
  }
  if (bad) {
    ++violation_count;
    if (violations.size() < kViolationCap) violations.push_back({describe(), margin});
  }
}

void SweepReport::merge(const SweepReport& other) {
  points_checked += other.points_checked;
  if (other.worst_margin < worst_margin) {
    worst_margin = other.worst_margin;
    worst_point = other.worst_point;
  }
  violation_count += other.violation_count;
  for (const auto& v : other.violations) {
    if (violations.size() >= kViolationCap) break;
    violations.push_back(v);
  }
}

nlohmann::json SweepReport::to_json() const {
  nlohmann::json v = nlohmann::json::array();
  for (const auto& x : violations) v.push_back({{"point", x.point}, {"margin", x.margin}});
  return {{"lemma", lemma_id},
          {"passed", passed()},
          {"points_checked", points_checked},
          {"worst_margin", worst_margin},
          {"worst_point", worst_point},
          {"tolerance", tolerance},
          {"violation_count", violation_count},
          {"violations", std::move(v)}};
}

double scaled_margin(double lhs, double rhs, double shift) {
  const double unit = std::exp(-shift);
  return (lhs - rhs) / std::max(unit, std::abs(lhs) + std::abs(rhs));
}

namespace {

// Exponentials are evaluated relative to e^{shift} once the largest exponent
// passes 500.
double shift_for(double alpha_max) { return std::max(0.0, alpha_max - 500.0); }

double pos_alpha(double t, double x) {
  const double xp = std::max(x, 0.0);
  return xp * xp / (2.0 * t);
}

}  // namespace

double discrete_bhe_margin(double t, double x) {
  const double a = std::max({pos_alpha(t, x + 1.0), pos_alpha(t, x - 1.0), pos_alpha(t - 1.0, x)});
  const double e = shift_for(a);
  const double lhs = specfun::phi_scaled(t, x + 1.0, e) + specfun::phi_scaled(t, x - 1.0, e);
  const double rhs = 2.0 * specfun::phi_scaled(t - 1.0, x, e);
  return scaled_margin(lhs, rhs, e);
}

double m0_convolution_margin(double z, double x) {
  const double s = 1.0 - z * z;
  const double a1 = 0.5 * (x + z) * (x + z);
  const double a2 = 0.5 * (x - z) * (x - z);
  const double a3 = x * x / (2.0 * s);
  const double e = shift_for(std::max({a1, a2, a3}));
  const double lhs = specfun::m0_scaled(a1, e) + specfun::m0_scaled(a2, e);
  const double rhs = 2.0 * std::sqrt(s) * specfun::m0_scaled(a3, e);
  return scaled_margin(lhs, rhs, e);
}

double expx2_margin(double x) {
  const double a = 0.5 * x * x;
  const double lhs = 1.0 - specfun::m0(a);
  const double rhs = std::exp(a) / (x * x + 1.0 + 2.0 / (x * x));
  return scaled_margin(lhs, rhs, 0.0);
}

double erfi_bound_margin(double z) {
  const double lhs = std::expm1(z * z) / z;
  const double rhs = 0.5 * std::sqrt(std::numbers::pi) * specfun::erfi(z);
  return (lhs - rhs) / lhs;
}

SweepReport check_discrete_bhe(std::size_t threads) {
  std::vector<double> ts{1.0 + 1e-6, 1.0 + 1e-3};
  const std::size_t n_log = 498;
  for (std::size_t i = 0; i < n_log; ++i) {
    // t - 1 log-spaced over [1e-2, 999]
    const double u = static_cast<double>(i) / static_cast<double>(n_log - 1);
    ts.push_back(1.0 + std::pow(10.0, -2.0 + u * (std::log10(999.0) + 2.0)));
  }
  std::vector<SweepReport> parts(ts.size());
  parallel_for(ts.size(), threads, [&](std::uint64_t k) {
    const double t = ts[k];
    SweepReport rep("discrete-bhe", 1e-10);
    const double half = 10.0 * std::sqrt(t);
    const std::size_t m = 2000;
    std::vector<double> xs;
    xs.reserve(m + 3);
    for (std::size_t j = 0; j < m; ++j) xs.push_back(-half + 2.0 * half * static_cast<double>(j) / static_cast<double>(m - 1));
    xs.push_back(-1.0);
    xs.push_back(0.0);
    xs.push_back(1.0);
    for (double x : xs) {
      rep.add(discrete_bhe_margin(t, x), [&] { return "t=" + fmt(t) + " x=" + fmt(x); });
    }
    parts[k] = std::move(rep);
  });
  SweepReport out("discrete-bhe", 1e-10);
  for (const auto& p : parts) out.merge(p);
  return out;
}

SweepReport check_m0_convolution() {
  SweepReport rep("m0-ineq", 1e-10);
  std::vector<double> zs;
  for (int k = 0; k <= 9; ++k) zs.push_back(0.1 * k);
  zs.push_back(0.99);
  const std::size_t m = 2401;
  for (double z : zs) {
    for (std::size_t j = 0; j < m; ++j) {
      const double x = -6.0 + 12.0 * static_cast<double>(j) / static_cast<double>(m - 1);
      rep.add(m0_convolution_margin(z, x), [&] { return "z=" + fmt(z) + " x=" + fmt(x); });
    }
  }
  return rep;
}

namespace {

double f_half(double t, double x) { return specfun::phi(t, 0.5 * x); }

}  // namespace

SweepReport check_discrete_ito_lower_bound(std::uint64_t seed) {
  SweepReport rep("discrete-ito", 1e-9);
  const CounterRng rng(seed, 0xd15c);
  const std::uint64_t sequences = 1000;
  for (std::uint64_t s = 0; s < sequences; ++s) {
    // Step families: uniform(-1,1), +-1 coin flips, and lazy (mostly constant).
    const int family = static_cast<int>(s % 3);
    const std::uint64_t T = 2 + static_cast<std::uint64_t>(rng.uniform(s, 0) * 199.0);
    double x = -4.0 + 8.0 * rng.uniform(s, 1);
    const double start = f_half(1.0, x);
    double drift_sum = 0.0;      // sum f_x dx
    double bhe_sum = 0.0;        // sum (f_xx / 2 + f_t)
    double remainder_sum = 0.0;  // sum of the concavity remainders
    double scale = std::abs(start);
    for (std::uint64_t t = 2; t <= T; ++t) {
      const double u = rng.uniform(s, 2 * t);
      double dx = 0.0;
      if (family == 0) dx = 2.0 * u - 1.0;
      if (family == 1) dx = u < 0.5 ? -1.0 : 1.0;
      if (family == 2) dx = u < 0.8 ? 0.0 : (2.0 * rng.uniform(s, 2 * t + 1) - 1.0);
      const double td = static_cast<double>(t);
      const double fx = discrete_deriv_x(f_half, td, x);
      const double fxx = discrete_deriv_xx(f_half, td, x);
      const double ft = discrete_deriv_t(f_half, td, x);
      const double up = f_half(td, x + 1.0);
      const double down = f_half(td, x - 1.0);
      const double next = f_half(td, x + dx);
      const double rem = next - 0.5 * (up + down) - fx * dx;
      drift_sum += fx * dx;
      bhe_sum += 0.5 * fxx + ft;
      remainder_sum += rem;
      scale += std::abs(fx * dx) + std::abs(0.5 * fxx) + std::abs(ft) + std::abs(next);
      if (family == 1) {
        // equality case of the concavity step
        rep.add(-std::abs(rem) / std::max(1.0, std::abs(next)), [&] {
          return "seq=" + std::to_string(s) + " t=" + std::to_string(t) + " (+-1 step remainder)";
        });
      }
      x += dx;
    }
    const double end = f_half(static_cast<double>(T), x);
    scale = std::max(1.0, scale);
    const double lhs = end - start;
    rep.add((lhs - drift_sum - bhe_sum) / scale, [&] { return "seq=" + std::to_string(s) + " T=" + std::to_string(T) + " inequality"; });
    rep.add(-std::abs(lhs - drift_sum - bhe_sum - remainder_sum) / scale,
            [&] { return "seq=" + std::to_string(s) + " T=" + std::to_string(T) + " identity"; });
  }
  return rep;
}

SweepReport check_potential_monotone_in_games(std::size_t threads) {
  struct Job {
    std::size_t n;
    AdversarySpec adv;
    std::string label;
  };
  std::vector<Job> jobs;
  const std::uint64_t T = 2000;
  for (std::size_t n : {2u, 8u, 32u}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      AdversarySpec u;
      u.kind = AdversaryKind::UniformRandom;
      u.seed = 1000 + seed;
      jobs.push_back({n, u, "uniform-random seed=" + std::to_string(u.seed)});
      AdversarySpec f;
      f.kind = AdversaryKind::FixedSequence;
      f.sequence = std::make_shared<const GainTable>(random_gain_table(n, T, 5000 + seed));
      jobs.push_back({n, f, "fixed-sequence seed=" + std::to_string(5000 + seed)});
    }
    AdversarySpec l;
    l.kind = AdversaryKind::SingleLeader;
    jobs.push_back({n, l, "single-leader"});
    AdversarySpec a;
    a.kind = AdversaryKind::Alternating;
    jobs.push_back({n, a, "alternating"});
  }

  std::vector<SweepReport> parts(jobs.size() + 2);
  parallel_for(jobs.size() + 2, threads, [&](std::uint64_t k) {
    SweepReport rep("potential-monotone", 1e-6);
    if (k < jobs.size()) {
      const Job& job = jobs[k];
      LearnerConfig cfg{LearnerKind::QuantilePotential, job.n, std::nullopt, std::nullopt};
      double phi1 = 0.0;
      GameOptions opt;
      opt.stride = Stride::each(1);
      opt.keep_states = false;
      opt.observer = [&](const RegretState& s) {
        const double t = static_cast<double>(s.round);
        const double v = quantile_potential_value(t, s.regret);
        if (s.round == 1) {
          phi1 = v;
          rep.add(v, [&] { return "n=" + std::to_string(job.n) + " " + job.label + " Phi(1, R_1) >= 0"; });
        } else {
          rep.add(v - phi1, [&] { return "n=" + std::to_string(job.n) + " " + job.label + " t=" + std::to_string(s.round); });
        }
      };
      run_discrete_game(cfg, job.adv, T, opt);
    } else {
      // Continuous counterpart: Phi(t, R(t)) >= -slack(dt).
      const std::size_t n = k == jobs.size() ? 2 : 8;
      const double dt = 1e-3;
      LearnerConfig cfg{LearnerKind::QuantilePotential, n, std::nullopt, std::nullopt};
      for (std::uint64_t trial = 0; trial < 20; ++trial) {
        const BrownianPathConfig path{CovarianceSpec::identity(n), dt, 1.0, 77};
        GameOptions opt;
        opt.stride = Stride::each(10);
        opt.keep_states = false;
        opt.observer = [&](const RegretState& s) {
          const double v = quantile_potential_value(s.time, s.regret) + discretization_slack(s.time, dt, n);
          rep.add(v, [&] {
            return "continuous n=" + std::to_string(n) + " trial=" + std::to_string(trial) + " t=" + fmt(s.time);
          });
        };
        run_continuous_game(cfg, path, trial, opt);
      }
    }
    parts[k] = std::move(rep);
  });
  SweepReport out("potential-monotone", 1e-6);
  for (const auto& p : parts) out.merge(p);
  return out;
}

SweepReport check_expx2() {
  SweepReport rep("expx2", 1e-12);
  const std::size_t m = 10000;
  for (std::size_t j = 1; j <= m; ++j) {
    const double x = 10.0 * static_cast<double>(j) / static_cast<double>(m);
    rep.add(expx2_margin(x), [&] { return "x=" + fmt(x); });
  }
  return rep;
}

SweepReport check_lambdabound() {
  SweepReport rep("lambdabound", 0.0);
  const std::size_t m = 1000;
  for (std::size_t j = 0; j < m; ++j) {
    const double alpha = j == 0 ? 0.0 : std::pow(10.0, -3.0 + 9.0 * static_cast<double>(j - 1) / static_cast<double>(m - 2));
    const double lam = specfun::lambda_inv(alpha);
    rep.add(specfun::lambda_upper_bound(alpha) - lam, [&] { return "alpha=" + fmt(alpha); });
  }
  // lambda(alpha) / sqrt(2 ln alpha) decreases along 1e2..1e6 and is <= 1.35 at 1e6.
  double prev = std::numeric_limits<double>::infinity();
  for (double alpha : {1e2, 1e3, 1e4, 1e5, 1e6}) {
    const double ratio = specfun::lambda_inv(alpha) / std::sqrt(2.0 * std::log(alpha));
    rep.add(prev - ratio, [&] { return "trend alpha=" + fmt(alpha) + " ratio=" + fmt(ratio); });
    prev = ratio;
    if (alpha == 1e6) rep.add(1.35 - ratio, [&] { return "limit alpha=1e6 ratio=" + fmt(ratio); });
  }
  return rep;
}

SweepReport check_erfi_bound() {
  SweepReport rep("erfi-bound", 0.0, true);
  const std::size_t m = 6000;
  for (std::size_t j = 1; j <= m; ++j) {
    const double z = 6.0 * static_cast<double>(j) / static_cast<double>(m);
    rep.add(erfi_bound_margin(z), [&] { return "z=" + fmt(z); });
  }
  return rep;
}

SweepReport check_specfun_lemmas() {
  SweepReport out("specfun-lemmas", 0.0);
  out.merge(check_expx2());
  out.merge(check_lambdabound());
  out.merge(check_erfi_bound());
  return out;
}

SweepReport check_continuous_bhe() {
  SweepReport rep("continuous-bhe", 1e-10);
  const std::size_t m = 2001;
  for (double t : {0.5, 1.0, 10.0}) {
    const double half = 10.0 * std::sqrt(t);
    for (std::size_t j = 0; j < m; ++j) {
      const double x = -half + 2.0 * half * static_cast<double>(j) / static_cast<double>(m - 1);
      const double dt_term = specfun::phi_dt(t, x);
      const double dxx_term = 0.5 * specfun::phi_dxx(t, x);
      const double scale = std::max(1.0, std::abs(dt_term) + std::abs(dxx_term));
      const double sum = (dt_term + dxx_term) / scale;
      rep.add(x >= 0.0 ? -std::abs(sum) : sum, [&] { return "t=" + fmt(t) + " x=" + fmt(x); });
    }
  }
  return rep;
}

SweepReport check_covariance_identity(std::uint64_t steps, std::uint64_t seed) {
  // Margin is 3 - |estimate - prediction| / SE, so a violation means the
  // estimate lies more than three standard errors from the prediction.
  SweepReport rep("covariance", 0.0);
  const double dt = 1e-3;
  struct Case {
    std::string label;
    CovarianceSpec cov;
    std::vector<double> p;
  };
  const std::vector<Case> cases{
      {"W=I n=2 p uniform", CovarianceSpec::identity(2), {0.5, 0.5}},
      {"rho=0.5 n=3", CovarianceSpec::equicorrelated(3, 0.5), {0.2, 0.3, 0.5}},
  };
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const Case& cs = cases[c];
    const std::size_t n = cs.cov.size();
    const SimplexDistribution p(cs.p);
    const std::vector<double> sigma = cs.cov.sigma();
    // a_ij = (e_i - p)^T Sigma (e_j - p)
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double v = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          for (std::size_t l = 0; l < n; ++l) {
            const double ui = (k == i ? 1.0 : 0.0) - p[k];
            const double uj = (l == j ? 1.0 : 0.0) - p[l];
            v += ui * sigma[k * n + l] * uj;
          }
        }
        a[i * n + j] = v;
      }
    }
    const BrownianPathConfig path{cs.cov, dt, static_cast<double>(steps) * dt, seed};
    const BrownianGainStream stream(path, c);
    RegretState state = RegretState::zero(n);
    std::vector<double> qv(n * n, 0.0);
    std::vector<double> prev(n, 0.0);
    for (std::uint64_t k = 1; k <= stream.steps(); ++k) {
      state.apply_increment(p, stream.increment(k), dt);
      for (std::size_t i = 0; i < n; ++i) {
        const double di = state.regret[i] - prev[i];
        for (std::size_t j = i; j < n; ++j) qv[i * n + j] += di * (state.regret[j] - prev[j]);
      }
      prev = state.regret;
    }
    const double total = static_cast<double>(stream.steps()) * dt;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const double predicted = a[i * n + j] * total;
        const double se = std::sqrt(static_cast<double>(stream.steps()) * (a[i * n + i] * a[j * n + j] + a[i * n + j] * a[i * n + j])) * dt;
        const double est = qv[i * n + j];
        rep.add(3.0 - std::abs(est - predicted) / se, [&] {
          return cs.label + " i=" + std::to_string(i + 1) + " j=" + std::to_string(j + 1) + " estimate=" + fmt(est / total) +
                 " predicted=" + fmt(a[i * n + j]);
        });
      }
    }
  }
  return rep;
}

const std::vector<LemmaEntry>& registry() {
  static const std::vector<LemmaEntry> entries{
      {"discrete-bhe", [](std::size_t th) { return check_discrete_bhe(th); }},
      {"m0-ineq", [](std::size_t) { return check_m0_convolution(); }},
      {"expx2", [](std::size_t) { return check_expx2(); }},
      {"lambdabound", [](std::size_t) { return check_lambdabound(); }},
      {"erfi-bound", [](std::size_t) { return check_erfi_bound(); }},
      {"continuous-bhe", [](std::size_t) { return check_continuous_bhe(); }},
      {"discrete-ito", [](std::size_t) { return check_discrete_ito_lower_bound(); }},
      {"potential-monotone", [](std::size_t th) { return check_potential_monotone_in_games(th); }},
      {"covariance", [](std::size_t) { return check_covariance_identity(); }},
  };
  return entries;
}

std::vector<std::string> lemma_names() {
  std::vector<std::string> out;
  for (const auto& e : registry()) out.push_back(e.name);
  return out;
}

std::vector<SweepReport> run_lemmas(const std::vector<std::string>& names, std::size_t threads) {
  std::vector<const LemmaEntry*> selected;
  if (names.empty()) {
    for (const auto& e : registry()) selected.push_back(&e);
  } else {
    for (const auto& name : names) {
      const auto it = std::find_if(registry().begin(), registry().end(), [&](const LemmaEntry& e) { return e.name == name; });
      if (it == registry().end()) {
        std::string known;
        for (const auto& e : registry()) known += (known.empty() ? "" : ", ") + e.name;
        throw ConfigError("unknown lemma '" + name + "' (known: " + known + ")");
      }
      selected.push_back(&*it);
    }
  }
  std::vector<SweepReport> out;
  for (const LemmaEntry* e : selected) out.push_back(e->run(threads));
  return out;
}

}  // namespace experts::verify
