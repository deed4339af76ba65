#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "experts/cli.hpp"
#include "experts/experiment_io.hpp"
#include "experts/specfun.hpp"
#include "json.hpp"

using namespace experts;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "experts");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("experts_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> v;
  for (std::string s; std::getline(in, s);) v.push_back(s);
  return v;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> v;
  std::stringstream ss(s);
  for (std::string f; std::getline(ss, f, ',');) v.push_back(f);
  return v;
}

}  // namespace

TEST_CASE("table prints lambda(0) in the alpha = 0 row") {
  const auto r = cli({"table", "--alpha-max", "10", "--points", "5"});
  REQUIRE(r.code == kExitOk);
  std::istringstream in(r.out);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "alpha,lambda,upper_bound");
  const auto f = split(first);
  REQUIRE(f.size() == 3);
  CHECK(std::stod(f[0]) == 0.0);
  CHECK(std::stod(f[1]) == doctest::Approx(1.3069297).epsilon(1e-7));
}

TEST_CASE("verify a single lemma") {
  const fs::path dir = scratch("verify");
  const auto r = cli({"verify", "--lemma", "expx2,erfi-bound", "--out", dir.string()});
  CHECK(r.code == kExitOk);
  const auto doc = load_json_file(dir / "verify.json");
  CHECK(doc.dump().find("expx2") != std::string::npos);
  CHECK(cli({"verify", "--lemma", "discrete-bhe"}).code == kExitOk);
  const auto bad = cli({"verify", "--lemma", "nonsense"});
  CHECK(bad.code == kExitConfig);
  CHECK(bad.err.find("nonsense") != std::string::npos);
}

TEST_CASE("bad specs exit with a config error and a diagnostic") {
  const fs::path dir = scratch("bad");
  const auto syntax = cli({"montecarlo", "--spec", write(dir / "a.json", "{\n  \"n\": 2,\n  oops\n}").string()});
  CHECK(syntax.code == kExitConfig);
  CHECK(syntax.err.find("line 3") != std::string::npos);

  const auto field = cli({"montecarlo", "--spec",
                          write(dir / "b.json", R"({"learner":"mwu-anytime","adversary":"uniform-random","n":0,"horizon":10})").string()});
  CHECK(field.code == kExitConfig);
  CHECK(field.err.find("field 'n'") != std::string::npos);

  const auto unknown = cli({"montecarlo", "--spec",
                            write(dir / "c.json", R"({"learner":"mwu-anytime","adversary":"uniform-random","n":2,"horizon":10,"colour":1})").string()});
  CHECK(unknown.code == kExitConfig);
  CHECK(unknown.err.find("colour") != std::string::npos);

  CHECK(cli({"montecarlo"}).code == kExitConfig);
  CHECK(cli({"simulate", "--spec", (dir / "missing.json").string()}).code == kExitConfig);
}

TEST_CASE("forced violation exits with 1") {
  const fs::path dir = scratch("violation");
  const auto spec = write(dir / "spec.json",
                          R"({"learner":{"kind":"mwu-anytime","eta":50},"adversary":"alternating","n":2,"horizon":200,"stride":1})");
  const auto r = cli({"montecarlo", "--spec", spec.string(), "--out", (dir / "out").string()});
  CHECK(r.code == kExitViolation);
  CHECK(r.err.find("summary.json") != std::string::npos);
  const auto doc = load_json_file(dir / "out" / "summary.json");
  CHECK(doc.dump().find("violation") != std::string::npos);
}

TEST_CASE("zero-gain fixed sequence gives zero regret in the transcript") {
  const fs::path dir = scratch("zero");
  const fs::path seq = fs::path(EXPERTS_TEST_DATA_DIR) / "zero_gains_n3.csv";
  nlohmann::json spec{{"learner", "quantile-potential"},
                      {"adversary", {{"kind", "fixed-sequence"}, {"sequence", seq.string()}}},
                      {"n", 3},
                      {"horizon", 5},
                      {"stride", 1}};
  const auto path = write(dir / "spec.json", spec.dump());
  const auto r = cli({"simulate", "--spec", path.string(), "--out", dir.string()});
  REQUIRE(r.code == kExitOk);
  const auto rows = lines(dir / "transcript.csv");
  REQUIRE(rows.size() == 1 + 5 * 3);
  CHECK(rows[0] == kTranscriptCsvHeader);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(split(rows[i])[2]) == 0.0);
}

TEST_CASE("montecarlo writes the summary files with fixed headers") {
  const fs::path dir = scratch("mc");
  const auto spec = write(dir / "spec.json",
                          R"({"learner":"quantile-potential","adversary":"uniform-random","n":4,"horizon":64,"trials":3,"epsilons":[0.5]})");
  const auto r = cli({"montecarlo", "--spec", spec.string(), "--out", dir.string(), "--threads", "2"});
  REQUIRE(r.code == kExitOk);
  const auto rows = lines(dir / "summary.csv");
  CHECK(rows[0] == kSummaryCsvHeader);
  // pow2 stride over 64 rounds: 7 points, 2 epsilons, 3 trials
  CHECK(rows.size() == 1 + 7 * 2 * 3);
  const auto doc = load_json_file(dir / "summary.json");
  CHECK(doc["trials"] == 3);
  CHECK(doc["violations"]["count"] == 0);
  CHECK(doc["aggregates"].size() == 7);
}

TEST_CASE("--set overrides spec fields") {
  const fs::path dir = scratch("set");
  const auto spec = write(dir / "spec.json",
                          R"({"learner":"mwu-anytime","adversary":"uniform-random","n":4,"horizon":64,"trials":2})");
  const auto r = cli({"montecarlo", "--spec", spec.string(), "--out", dir.string(), "--set", "horizon=16", "--set", "trials=1"});
  REQUIRE(r.code == kExitOk);
  // pow2 over 16 rounds: 1,2,4,8,16; one epsilon (1/n); one trial
  CHECK(lines(dir / "summary.csv").size() == 1 + 5);

  const auto bad = cli({"montecarlo", "--spec", spec.string(), "--out", dir.string(), "--set", "n=-3"});
  CHECK(bad.code == kExitConfig);
}

TEST_CASE("apply_override parses values and creates paths") {
  nlohmann::json doc = nlohmann::json::object();
  apply_override(doc, "path.dt=0.01");
  apply_override(doc, "learner=mwu-anytime");
  apply_override(doc, "learner.eta=2");
  CHECK(doc["path"]["dt"].get<double>() == 0.01);
  CHECK(doc["learner"]["kind"] == "mwu-anytime");
  CHECK(doc["learner"]["eta"].get<double>() == 2.0);
  CHECK_THROWS(apply_override(doc, "novalue"));
}

TEST_CASE("format_number round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678, -2.5}) CHECK(std::stod(format_number(v)) == v);
  CHECK(format_number(2.0) == "2");
}
