#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "platoon/correlated_dp.hpp"
#include "platoon/merge_dp.hpp"

namespace platoon {

/// Schema violation, carrying the JSON path of the offending field.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

struct CorrelatedSpec {
    std::size_t history_length = 1;
    std::vector<ConditionalTraversalModel> follower_segments;
    /// Absent: derived from the first segment's table at the middle speed.
    std::optional<HistoryDistribution> initial_history;
    std::size_t max_states = 20'000'000;
    std::size_t max_history_length = 2;
    std::size_t max_regimes = 3;
};

struct ParsedScenario {
    Scenario scenario;
    /// Speed used for the constant-speed baseline in summaries, if admissible.
    std::optional<double> baseline_speed;
    std::optional<CorrelatedSpec> correlated;
    /// Informational messages (defaults applied, rounding to ticks).
    std::vector<std::string> notices;
};

/// Hours to ticks, rounding half up. Appends a notice when rounding occurs.
Tick hours_to_ticks(double hours, double tick_hours, const std::string& path,
                    std::vector<std::string>& notices);

ParsedScenario parse_scenario(const nlohmann::json& doc);
ParsedScenario parse_scenario_file(const std::filesystem::path& path);

/// Lowers the correlated section against the scenario's leader model.
CorrelatedProblem build_correlated_problem(const ParsedScenario& parsed);

}  // namespace platoon
