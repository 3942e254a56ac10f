// Command-line front end for the platoon merge solver.
//
//   platoon solve scenario.json [--export-dir DIR] [--epsilon X] [--json] [--quiet]
//   platoon exact scenario.json
//   platoon fixed scenario.json --speed 80
//   platoon rollout scenario.json --trials 100000 --seed 7 [--speed 80]
//   platoon correlated scenario.json
//
// Exit codes: 0 success, 2 when every arrival is pruned (merge probability
// at most epsilon), 1 on any error.

#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "platoon/correlated_dp.hpp"
#include "platoon/merge_dp.hpp"
#include "platoon/report.hpp"
#include "platoon/rollout.hpp"
#include "platoon/scenario_io.hpp"

using namespace platoon;

namespace {

struct Options {
    std::string scenario;
    std::string export_dir;
    std::optional<double> epsilon;
    bool quiet = false;
    bool json = false;
    std::optional<double> speed;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, Options& opt) {
    cmd->add_option("scenario", opt.scenario, "Scenario JSON file")->required();
    cmd->add_option("--export-dir", opt.export_dir, "Write CSV plot data to this directory");
    cmd->add_option("--epsilon", opt.epsilon, "Override the error tolerance")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_flag("--quiet", opt.quiet, "Suppress the human-readable summary and notices");
    cmd->add_flag("--json", opt.json, "Print the summary as one JSON object on stdout");
}

ParsedScenario load(const Options& opt) {
    ParsedScenario parsed = parse_scenario_file(opt.scenario);
    if (opt.epsilon) {
        if (*opt.epsilon >= 1.0) {
            throw std::invalid_argument("--epsilon must be below 1");
        }
        parsed.scenario.epsilon = *opt.epsilon;
    }
    if (!opt.quiet) {
        for (const auto& n : parsed.notices) {
            std::cerr << "note: " << n << '\n';
        }
    }
    return parsed;
}

int emit(const SummaryReport& report, const Options& opt) {
    if (opt.json) {
        std::cout << report.to_json() << '\n';
    } else if (!opt.quiet) {
        std::cout << report.to_text();
    }
    return report.prune_all ? 2 : 0;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void add_baseline(SummaryReport& report, const ParsedScenario& parsed, const MergeProblem& problem) {
    if (!parsed.baseline_speed) {
        return;
    }
    const auto& speeds = parsed.scenario.speeds;
    const std::size_t k = speeds.index_of(*parsed.baseline_speed);
    report.fixed_speed = speeds[k];
    report.merge_probability_fixed = evaluate_fixed_policy(problem, k);
}

int cmd_solve(const Options& opt, bool exact) {
    const ParsedScenario parsed = load(opt);
    const auto t0 = std::chrono::steady_clock::now();
    const MergeProblem problem = build_problem(parsed.scenario);
    const SolveResult truncated = backward_solve(problem);

    SummaryReport report;
    report.command = exact ? "exact" : "solve";
    report.epsilon = problem.epsilon;
    report.merge_probability_optimal = truncated.merge_probability;
    report.prune_all = truncated.pruned();
    report.truncation_ratio = truncated.truncation_ratio;
    if (!truncated.pruned()) {
        report.window_width = truncated.bounds.width();
    }
    const SolveResult* exported = &truncated;
    std::optional<SolveResult> full;
    if (exact) {
        full = exact_solve(problem);
        report.merge_probability_optimal = full->merge_probability;
        report.actual_truncation_error = full->merge_probability - truncated.merge_probability;
        report.prune_all = full->pruned();
        exported = &*full;
    }
    add_baseline(report, parsed, problem);
    report.wall_clock_seconds = seconds_since(t0);
    if (!opt.export_dir.empty()) {
        export_solution(*exported, parsed.scenario.tick_hours, opt.export_dir);
    }
    return emit(report, opt);
}

int cmd_fixed(const Options& opt) {
    const ParsedScenario parsed = load(opt);
    const auto t0 = std::chrono::steady_clock::now();
    const MergeProblem problem = build_problem(parsed.scenario);
    const double v = *opt.speed;
    SummaryReport report;
    report.command = "fixed";
    report.epsilon = problem.epsilon;
    report.fixed_speed = v;
    report.merge_probability_fixed =
        evaluate_fixed_policy(problem, parsed.scenario.speeds.index_of(v));
    report.wall_clock_seconds = seconds_since(t0);
    if (!opt.export_dir.empty()) {
        SolveResult leader_only;
        leader_only.leader_arrival = leader_forward(problem);
        export_solution(leader_only, parsed.scenario.tick_hours, opt.export_dir);
    }
    return emit(report, opt);
}

int cmd_rollout(const Options& opt) {
    const ParsedScenario parsed = load(opt);
    const auto t0 = std::chrono::steady_clock::now();
    const MergeProblem problem = build_problem(parsed.scenario);
    RolloutConfig config;
    config.n_trials = opt.trials;
    config.seed = opt.seed;

    SummaryReport report;
    report.command = "rollout";
    report.epsilon = problem.epsilon;
    if (opt.speed) {
        config.fixed_speed_index = parsed.scenario.speeds.index_of(*opt.speed);
        report.fixed_speed = *opt.speed;
        report.merge_probability_fixed = evaluate_fixed_policy(problem, *config.fixed_speed_index);
        report.rollout = run_fixed_rollouts(problem, leader_forward(problem), config);
    } else {
        const SolveResult solved = backward_solve(problem);
        report.merge_probability_optimal = solved.merge_probability;
        report.prune_all = solved.pruned();
        report.rollout = run_rollouts(problem, solved.leader_arrival, solved, config);
        if (!opt.export_dir.empty()) {
            export_solution(solved, parsed.scenario.tick_hours, opt.export_dir);
        }
    }
    report.wall_clock_seconds = seconds_since(t0);
    return emit(report, opt);
}

int cmd_correlated(const Options& opt) {
    const ParsedScenario parsed = load(opt);
    const auto t0 = std::chrono::steady_clock::now();
    CorrelatedProblem problem = build_correlated_problem(parsed);
    const CorrelatedSolveResult solved = correlated_backward_solve(problem);
    SummaryReport report;
    report.command = "correlated";
    report.epsilon = problem.epsilon;
    report.merge_probability_optimal = solved.merge_probability;
    report.prune_all = solved.pruned();
    if (!solved.pruned()) {
        report.window_width = solved.bounds.width();
    }
    report.wall_clock_seconds = seconds_since(t0);
    if (!opt.export_dir.empty()) {
        export_correlated(solved, problem.leader_arrival, parsed.scenario.tick_hours,
                          opt.export_dir);
    }
    return emit(report, opt);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Merge-probability maximizing speed policies for truck platoon coordination"};
    app.require_subcommand(1);

    Options opt;
    auto* solve = app.add_subcommand("solve", "Truncated dynamic program: optimal policy and merge probability");
    add_common(solve, opt);
    auto* exact = app.add_subcommand("exact", "Also solve without truncation and report the truncation error");
    add_common(exact, opt);
    auto* fixed = app.add_subcommand("fixed", "Merge probability when holding one reference speed");
    add_common(fixed, opt);
    fixed->add_option("--speed", opt.speed, "Reference speed in km/h")->required();
    auto* rollout = app.add_subcommand("rollout", "Monte-Carlo check of the solved policy");
    add_common(rollout, opt);
    rollout->add_option("--trials", opt.trials, "Number of simulated trips")
        ->check(CLI::PositiveNumber);
    rollout->add_option("--seed", opt.seed, "Random seed")->required();
    rollout->add_option("--speed", opt.speed, "Simulate a fixed speed instead of the policy");
    auto* correlated = app.add_subcommand("correlated", "History-augmented solve for correlated traversal times");
    add_common(correlated, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (solve->parsed()) {
            return cmd_solve(opt, false);
        }
        if (exact->parsed()) {
            return cmd_solve(opt, true);
        }
        if (fixed->parsed()) {
            return cmd_fixed(opt);
        }
        if (rollout->parsed()) {
            return cmd_rollout(opt);
        }
        if (correlated->parsed()) {
            return cmd_correlated(opt);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
