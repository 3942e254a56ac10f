#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "platoon/correlated_dp.hpp"
#include "platoon/merge_dp.hpp"
#include "platoon/rollout.hpp"

namespace platoon {

/// Shortest round-trippable text for a double (17 significant digits).
std::string format_real(double x);

struct SummaryReport {
    std::string command;
    std::optional<double> merge_probability_optimal;
    std::optional<double> merge_probability_fixed;
    std::optional<double> fixed_speed;
    std::optional<double> truncation_ratio;
    std::optional<double> actual_truncation_error;
    std::optional<RolloutReport> rollout;
    std::optional<Tick> window_width;
    double epsilon = 0.0;
    bool prune_all = false;
    double wall_clock_seconds = 0.0;

    std::string to_json() const;
    std::string to_text() const;
};

/// Writes leader_arrival.csv, bounds.csv and value_stage_<i>.csv (i from 1).
void export_solution(const SolveResult& result, double tick_hours,
                     const std::filesystem::path& dir);

/// Correlated tables: value_stage_<i>.csv gains a history column.
void export_correlated(const CorrelatedSolveResult& result, const DiscretePmf& leader_arrival,
                       double tick_hours, const std::filesystem::path& dir);

}  // namespace platoon
