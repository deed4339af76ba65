#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "experts/engine.hpp"
#include "json.hpp"

namespace experts {

// Applies "a.b.c=value" onto a JSON document. The value is parsed as JSON
// when possible, otherwise stored as a string. Intermediate objects are
// created as needed.
void apply_override(nlohmann::json& doc, const std::string& assignment);

nlohmann::json load_json_file(const std::filesystem::path& path);

// Field-level diagnostics are reported as ConfigError("field 'x.y': ...").
ExperimentSpec parse_experiment_spec(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

std::string format_number(double v);

// t,trial,regret,quantile_eps,quantile_value,bound_kind,bound_value,violation
inline constexpr const char* kSummaryCsvHeader =
    "t,trial,regret,quantile_eps,quantile_value,bound_kind,bound_value,violation";
// t,expert,regret,cumulative_gain,player_gain
inline constexpr const char* kTranscriptCsvHeader = "t,expert,regret,cumulative_gain,player_gain";

void write_summary_csv(std::ostream& out, const ExperimentSummary& summary);
nlohmann::json summary_to_json(const ExperimentSpec& spec, const ExperimentSummary& summary);
void write_transcript_csv(std::ostream& out, const GameTranscript& transcript, bool continuous);

// Runs trial 0 of the spec as a single game.
GameTranscript simulate_one(const ExperimentSpec& spec);

}  // namespace experts
