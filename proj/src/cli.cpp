#include "experts/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "experts/experiment_io.hpp"
#include "experts/specfun.hpp"
#include "experts/verifier.hpp"

namespace experts {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string spec_path;
  std::string out_dir;
  std::size_t threads = 0;
  std::string lemmas;
  double alpha_max = 1e6;
  std::size_t points = 200;
  std::vector<std::string> overrides;
};

ExperimentSpec load_spec(const Options& o) {
  if (o.spec_path.empty()) throw ConfigError("--spec is required");
  nlohmann::json doc = load_json_file(o.spec_path);
  for (const auto& ov : o.overrides) apply_override(doc, ov);
  return parse_experiment_spec(doc, fs::path(o.spec_path).parent_path());
}

fs::path prepare_out(const Options& o) {
  const fs::path dir = o.out_dir.empty() ? fs::path(".") : fs::path(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + p.string() + "'");
  return f;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const ExperimentSpec spec = load_spec(o);
  const fs::path dir = prepare_out(o);
  const GameTranscript tr = simulate_one(spec);
  auto f = open_out(dir / "transcript.csv");
  write_transcript_csv(f, tr, spec.continuous());
  out << "wrote " << (dir / "transcript.csv").string() << " (" << tr.states.size() << " sampled states";
  if (tr.experimental) out << ", experimental learner";
  out << ")\n";
  return kExitOk;
}

int cmd_montecarlo(const Options& o, std::ostream& out, std::ostream& err) {
  const ExperimentSpec spec = load_spec(o);
  const fs::path dir = prepare_out(o);
  const ExperimentSummary summary = monte_carlo(spec, o.threads);
  {
    auto f = open_out(dir / "summary.csv");
    write_summary_csv(f, summary);
  }
  {
    auto f = open_out(dir / "summary.json");
    f << summary_to_json(spec, summary).dump(2) << '\n';
  }
  out << "trials=" << summary.trials << " violations=" << summary.violation_count << " terminal_mean_regret="
      << format_number(summary.terminal_mean_regret) << '\n';
  if (summary.violation_count > 0) {
    err << "bound violations: " << summary.violation_count << "; see " << (dir / "summary.json").string() << '\n';
    return kExitViolation;
  }
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  const auto reports = verify::run_lemmas(split_list(o.lemmas), o.threads);
  nlohmann::json doc = nlohmann::json::array();
  bool ok = true;
  for (const auto& r : reports) {
    doc.push_back(r.to_json());
    ok = ok && r.passed();
    out << (r.passed() ? "PASS " : "FAIL ") << r.lemma_id << " points=" << r.points_checked
        << " worst_margin=" << format_number(r.worst_margin) << " violations=" << r.violation_count << '\n';
  }
  std::string where = "stdout";
  if (!o.out_dir.empty()) {
    const fs::path dir = prepare_out(o);
    auto f = open_out(dir / "verify.json");
    f << doc.dump(2) << '\n';
    where = (dir / "verify.json").string();
  } else {
    out << doc.dump(2) << '\n';
  }
  if (!ok) {
    err << "lemma violations; see " << where << '\n';
    return kExitViolation;
  }
  return kExitOk;
}

int cmd_table(const Options& o, std::ostream& out) {
  if (!(o.alpha_max > 0.0) || !std::isfinite(o.alpha_max)) throw ConfigError("--alpha-max must be positive");
  if (o.points < 2) throw ConfigError("--points must be >= 2");
  std::ostringstream csv;
  csv << "alpha,lambda,upper_bound\n";
  // alpha = 0, then log-spaced from min(1e-3, alpha_max) up to alpha_max.
  const double lo = std::log10(std::min(1e-3, o.alpha_max));
  const double hi = std::log10(o.alpha_max);
  for (std::size_t k = 0; k < o.points; ++k) {
    double alpha = 0.0;
    if (k > 0) {
      const double u = o.points == 2 ? 1.0 : static_cast<double>(k - 1) / static_cast<double>(o.points - 2);
      alpha = k + 1 == o.points ? o.alpha_max : std::pow(10.0, lo + u * (hi - lo));
    }
    csv << format_number(alpha) << ',' << format_number(specfun::lambda_inv(alpha)) << ','
        << format_number(specfun::lambda_upper_bound(alpha)) << '\n';
  }
  if (o.out_dir.empty()) {
    out << csv.str();
  } else {
    const fs::path dir = prepare_out(o);
    auto f = open_out(dir / "table.csv");
    f << csv.str();
    out << "wrote " << (dir / "table.csv").string() << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Prediction with expert advice: simulation, Monte Carlo bounds and lemma sweeps", "experts"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out_dir, "Output directory");
    sub->add_option("--threads", o.threads, "Worker threads (default: hardware concurrency)");
  };
  auto add_spec = [&](CLI::App* sub) {
    sub->add_option("--spec", o.spec_path, "Experiment spec (JSON)")->required();
    sub->add_option("--set", o.overrides, "Override key=value (dotted path, repeatable)")->allow_extra_args(false);
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Run one game and write transcript.csv");
  add_spec(simulate);
  add_common(simulate);
  CLI::App* montecarlo = app.add_subcommand("montecarlo", "Run trials and write summary.csv and summary.json");
  add_spec(montecarlo);
  add_common(montecarlo);
  CLI::App* verify_cmd = app.add_subcommand("verify", "Run lemma sweeps");
  verify_cmd->add_option("--lemma", o.lemmas, "Comma-separated subset of lemma names");
  add_common(verify_cmd);
  CLI::App* table = app.add_subcommand("table", "Write alpha,lambda,upper_bound CSV");
  table->add_option("--alpha-max", o.alpha_max, "Largest alpha");
  table->add_option("--points", o.points, "Number of rows");
  table->add_option("--out", o.out_dir, "Output directory (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (o.threads == 0) o.threads = default_threads();

  try {
    if (simulate->parsed()) return cmd_simulate(o, out);
    if (montecarlo->parsed()) return cmd_montecarlo(o, out, err);
    if (verify_cmd->parsed()) return cmd_verify(o, out, err);
    if (table->parsed()) return cmd_table(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const EndOfSequence& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace experts
