#include "experts/experiment_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

namespace experts {

using nlohmann::json;

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot_pos = key.find('.', start);
    const std::string part = key.substr(start, dot_pos == std::string::npos ? std::string::npos : dot_pos - start);
    if (part.empty()) throw ConfigError("override '" + assignment + "' has an empty path component");
    if (!node->is_object()) {
      // "learner=quantile-potential" followed by "learner.horizon=..." promotes
      // the shorthand string to an object.
      if (node->is_string()) {
        *node = json{{"kind", node->get<std::string>()}};
      } else if (node->is_null()) {
        *node = json::object();
      } else {
        throw ConfigError("override '" + assignment + "': '" + part + "' is below a non-object value");
      }
    }
    node = &(*node)[part];
    if (dot_pos == std::string::npos) break;
    start = dot_pos + 1;
  }
  *node = std::move(value);
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read spec '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw ConfigError("field '" + field + "': " + what);
}

double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) field_error(field, "expected a number");
  return j.get<double>();
}

std::uint64_t get_count(const json& j, const std::string& field) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    if (j.get<std::int64_t>() < 0) field_error(field, "must be non-negative");
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v >= 0.0 && v == std::floor(v) && v < 1.8e19) return static_cast<std::uint64_t>(v);
  }
  field_error(field, "expected a non-negative integer");
}

std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) field_error(field, "expected a string");
  return j.get<std::string>();
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) field_error(prefix + it.key(), "unknown key");
  }
}

std::vector<double> get_matrix(const json& j, std::size_t n, const std::string& field) {
  if (!j.is_array() || j.size() != n) field_error(field, "expected an array of " + std::to_string(n) + " rows");
  std::vector<double> out;
  out.reserve(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    const json& row = j[r];
    const std::string rf = field + "[" + std::to_string(r) + "]";
    if (!row.is_array() || row.size() != n) field_error(rf, "expected " + std::to_string(n) + " entries");
    for (std::size_t c = 0; c < n; ++c) out.push_back(get_number(row[c], rf + "[" + std::to_string(c) + "]"));
  }
  return out;
}

template <class F>
auto with_field(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind("field '", 0) == 0) throw;
    field_error(field, msg);
  }
}

}  // namespace

ExperimentSpec parse_experiment_spec(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("spec must be a JSON object");
  reject_unknown(doc, {"learner", "adversary", "path", "n", "horizon", "dt", "trials", "epsilons", "seeds", "base_seed", "stride"},
                 "");

  ExperimentSpec spec;
  if (!doc.contains("n")) field_error("n", "required");
  spec.n = get_count(doc["n"], "n");
  if (spec.n < 1) field_error("n", "must be >= 1");
  if (!doc.contains("horizon")) field_error("horizon", "required");
  spec.horizon = get_number(doc["horizon"], "horizon");
  if (!(spec.horizon >= 1.0)) field_error("horizon", "must be >= 1");
  if (doc.contains("trials")) spec.trials = get_count(doc["trials"], "trials");
  if (spec.trials < 1) field_error("trials", "must be >= 1");

  // learner
  if (!doc.contains("learner")) field_error("learner", "required");
  const json& lj = doc["learner"];
  spec.learner.n = spec.n;
  if (lj.is_string()) {
    spec.learner.kind = with_field("learner", [&] { return learner_kind_from_string(lj.get<std::string>()); });
  } else if (lj.is_object()) {
    reject_unknown(lj, {"kind", "horizon", "eta"}, "learner.");
    if (!lj.contains("kind")) field_error("learner.kind", "required");
    const std::string kind = get_string(lj["kind"], "learner.kind");
    spec.learner.kind = with_field("learner.kind", [&] { return learner_kind_from_string(kind); });
    if (lj.contains("horizon")) spec.learner.horizon = get_number(lj["horizon"], "learner.horizon");
    if (lj.contains("eta")) spec.learner.eta_override = get_number(lj["eta"], "learner.eta");
  } else {
    field_error("learner", "expected a string or an object");
  }
  if (spec.learner.kind == LearnerKind::MwuFixed && !spec.learner.horizon) spec.learner.horizon = spec.horizon;
  with_field("learner", [&] {
    spec.learner.validate();
    return 0;
  });

  // environment
  const bool has_adv = doc.contains("adversary");
  const bool has_path = doc.contains("path") || doc.contains("dt");
  if (has_adv == has_path) field_error("adversary", "give exactly one of 'adversary' (discrete) and 'path' (continuous)");
  if (has_adv) {
    const json& aj = doc["adversary"];
    AdversarySpec adv;
    if (aj.is_string()) {
      adv.kind = with_field("adversary", [&] { return adversary_kind_from_string(aj.get<std::string>()); });
    } else if (aj.is_object()) {
      reject_unknown(aj, {"kind", "sequence", "leader"}, "adversary.");
      if (!aj.contains("kind")) field_error("adversary.kind", "required");
      const std::string kind = get_string(aj["kind"], "adversary.kind");
      adv.kind = with_field("adversary.kind", [&] { return adversary_kind_from_string(kind); });
      if (aj.contains("sequence")) {
        std::filesystem::path p = get_string(aj["sequence"], "adversary.sequence");
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        adv.sequence_path = p;
      }
      if (aj.contains("leader")) adv.leader = get_count(aj["leader"], "adversary.leader");
    } else {
      field_error("adversary", "expected a string or an object");
    }
    if (adv.kind == AdversaryKind::FixedSequence) {
      if (!adv.sequence_path) field_error("adversary.sequence", "required for fixed-sequence");
      // Load once here so that CSV errors surface before any computation.
      const auto table = with_field("adversary.sequence", [&] { return read_gain_table(*adv.sequence_path, spec.n); });
      adv.sequence = std::make_shared<const GainTable>(table);
    }
    if (adv.kind == AdversaryKind::SingleLeader && adv.leader >= spec.n) field_error("adversary.leader", "must be < n");
    if (spec.horizon != std::floor(spec.horizon)) field_error("horizon", "must be an integer for discrete games");
    spec.adversary = adv;
  } else {
    PathSpec path;
    const json pj = doc.contains("path") ? doc["path"] : json::object();
    if (!pj.is_object()) field_error("path", "expected an object");
    reject_unknown(pj, {"dt", "rho", "correlation", "weights"}, "path.");
    if (pj.contains("dt")) path.dt = get_number(pj["dt"], "path.dt");
    if (doc.contains("dt")) path.dt = get_number(doc["dt"], "dt");
    if (!(path.dt > 0.0)) field_error("path.dt", "must be positive");
    if (!(spec.horizon >= path.dt)) field_error("horizon", "must be >= dt");
    if (pj.contains("rho")) path.rho = get_number(pj["rho"], "path.rho");
    if (pj.contains("correlation")) path.correlation = get_matrix(pj["correlation"], spec.n, "path.correlation");
    if (pj.contains("weights")) path.weights = get_matrix(pj["weights"], spec.n, "path.weights");
    with_field("path", [&] { return path.covariance(spec.n); });
    spec.path = path;
  }

  if (doc.contains("epsilons")) {
    const json& ej = doc["epsilons"];
    if (!ej.is_array()) field_error("epsilons", "expected an array");
    for (std::size_t i = 0; i < ej.size(); ++i) {
      const std::string f = "epsilons[" + std::to_string(i) + "]";
      const double e = get_number(ej[i], f);
      if (!(e > 0.0 && e <= 1.0)) field_error(f, "must lie in (0, 1]");
      spec.epsilons.push_back(e);
    }
  }
  if (doc.contains("seeds") && doc.contains("base_seed")) field_error("seeds", "give either 'seeds' or 'base_seed'");
  if (doc.contains("seeds")) {
    const json& sj = doc["seeds"];
    if (!sj.is_array()) field_error("seeds", "expected an array");
    for (std::size_t i = 0; i < sj.size(); ++i) spec.seeds.push_back(get_count(sj[i], "seeds[" + std::to_string(i) + "]"));
    if (spec.seeds.size() != spec.trials) field_error("seeds", "must list one seed per trial");
  }
  if (doc.contains("base_seed")) spec.base_seed = get_count(doc["base_seed"], "base_seed");
  if (doc.contains("stride")) {
    const json& st = doc["stride"];
    if (st.is_string()) {
      if (st.get<std::string>() != "pow2") field_error("stride", "expected \"pow2\" or a positive integer");
      spec.stride = Stride::pow2();
    } else {
      const std::uint64_t k = get_count(st, "stride");
      if (k < 1) field_error("stride", "must be >= 1");
      spec.stride = Stride::each(k);
    }
  }
  spec.validate();
  return spec;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_summary_csv(std::ostream& out, const ExperimentSummary& s) {
  out << kSummaryCsvHeader << '\n';
  for (const TrialRow& r : s.rows) {
    out << format_number(r.t) << ',' << r.trial << ',' << format_number(r.regret) << ',' << format_number(r.epsilon) << ','
        << format_number(r.quantile_value) << ',' << to_string(r.bound_kind) << ','
        << (r.bound_kind == BoundKind::None ? std::string() : format_number(r.bound_value)) << ',' << (r.violation ? 1 : 0)
        << '\n';
  }
}

namespace {

json row_to_json(const TrialRow& r) {
  return json{{"t", r.t},
              {"trial", r.trial},
              {"regret", r.regret},
              {"quantile_eps", r.epsilon},
              {"quantile_value", r.quantile_value},
              {"bound_kind", to_string(r.bound_kind)},
              {"bound_value", r.bound_value}};
}

}  // namespace

json summary_to_json(const ExperimentSpec& spec, const ExperimentSummary& s) {
  json j;
  j["learner"] = to_string(spec.learner.kind);
  if (spec.adversary) j["adversary"] = to_string(spec.adversary->kind);
  if (spec.path) j["path"] = json{{"dt", spec.path->dt}};
  j["n"] = spec.n;
  j["horizon"] = spec.horizon;
  j["trials"] = s.trials;
  j["epsilons"] = s.epsilons;
  j["experimental"] = s.experimental;
  j["tolerance"] = json{{"per_row", "scale * sqrt(t)"}, {"scale", s.tolerance_scale}};
  if (spec.path) j["slack"] = json{{"formula", "5 sqrt(dt) sqrt(ln n + 1) sqrt(t)"}, {"coefficient", s.slack_coefficient}};
  j["max_orthogonality_residual"] = s.max_orthogonality_residual;
  j["terminal_regret"] = json{{"mean", s.terminal_mean_regret}, {"stderr", s.terminal_regret_stderr}};

  json rows = json::array();
  for (const AggregateRow& a : s.aggregates) {
    json r{{"t", a.t}, {"mean_regret", a.mean_regret}, {"max_regret", a.max_regret}};
    json q = json::array();
    for (std::size_t k = 0; k < s.epsilons.size(); ++k) {
      json e{{"epsilon", s.epsilons[k]}, {"mean_quantile_regret", a.mean_quantile[k]}, {"bound_kind", to_string(a.bound_kind[k])}};
      if (a.bound_kind[k] != BoundKind::None) e["bound_value"] = a.bound_value[k];
      q.push_back(std::move(e));
    }
    r["quantiles"] = std::move(q);
    rows.push_back(std::move(r));
  }
  j["aggregates"] = std::move(rows);

  json v = json::array();
  for (const TrialRow& r : s.violations) v.push_back(row_to_json(r));
  j["violations"] = json{{"count", s.violation_count}, {"first", std::move(v)}};
  return j;
}

void write_transcript_csv(std::ostream& out, const GameTranscript& tr, bool continuous) {
  out << kTranscriptCsvHeader << '\n';
  for (const RegretState& s : tr.states) {
    const std::string t = continuous ? format_number(s.time) : std::to_string(s.round);
    for (std::size_t i = 0; i < s.size(); ++i) {
      out << t << ',' << (i + 1) << ',' << format_number(s.regret[i]) << ',' << format_number(s.cumulative_gain[i]) << ','
          << format_number(s.player_gain) << '\n';
    }
  }
}

GameTranscript simulate_one(const ExperimentSpec& spec_in) {
  ExperimentSpec spec = spec_in;
  spec.validate();
  GameOptions opt;
  opt.stride = spec.stride;
  const std::uint64_t seed = spec.trial_seed(0);
  if (spec.continuous()) {
    const BrownianPathConfig path{spec.path->covariance(spec.n), spec.path->dt, spec.horizon, seed};
    return run_continuous_game(spec.learner, path, 0, opt);
  }
  AdversarySpec adv = *spec.adversary;
  adv.seed = seed;
  return run_discrete_game(spec.learner, adv, static_cast<std::uint64_t>(spec.horizon), opt);
}

}  // namespace experts
