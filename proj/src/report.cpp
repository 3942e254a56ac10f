#include "platoon/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace platoon {

std::string format_real(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string SummaryReport::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) {
            j[key] = *v;
        }
    };
    put("merge_probability_optimal", merge_probability_optimal);
    put("merge_probability_fixed", merge_probability_fixed);
    put("fixed_speed", fixed_speed);
    put("truncation_ratio", truncation_ratio);
    put("actual_truncation_error", actual_truncation_error);
    if (window_width) {
        j["window_width"] = *window_width;
    }
    j["epsilon"] = epsilon;
    j["prune_all"] = prune_all;
    if (rollout) {
        j["rollout"] = {{"estimate", rollout->estimate},
                        {"standard_error", rollout->standard_error},
                        {"n_merges", rollout->n_merges},
                        {"n_trials", rollout->n_trials},
                        {"n_abandoned", rollout->n_abandoned}};
    }
    j["wall_clock_seconds"] = wall_clock_seconds;
    return j.dump();
}

std::string SummaryReport::to_text() const {
    std::ostringstream out;
    char buf[128];
    auto pct = [&](const char* label, const std::optional<double>& v) {
        if (v) {
            std::snprintf(buf, sizeof buf, "%-28s %9.4f %%\n", label, 100.0 * *v);
            out << buf;
        }
    };
    out << command << " (epsilon = " << epsilon << ")\n";
    if (prune_all) {
        out << "no follower arrival keeps the merge probability above epsilon\n";
    }
    pct("merge probability (optimal)", merge_probability_optimal);
    if (merge_probability_fixed) {
        char label[64];
        std::snprintf(label, sizeof label, "merge probability (%g km/h)", fixed_speed.value_or(0.0));
        pct(label, merge_probability_fixed);
    }
    if (truncation_ratio) {
        std::snprintf(buf, sizeof buf, "%-28s %9.3f x\n", "window shrink vs eps = 0",
                      *truncation_ratio);
        out << buf;
    }
    if (window_width) {
        out << "window width                  " << *window_width << " ticks\n";
    }
    pct("truncation error", actual_truncation_error);
    if (rollout) {
        std::snprintf(buf, sizeof buf, "%-28s %9.4f %% +- %.4f (n = %llu)\n", "rollout estimate",
                      100.0 * rollout->estimate, 100.0 * rollout->standard_error,
                      static_cast<unsigned long long>(rollout->n_trials));
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "%-28s %9.3f s\n", "wall clock", wall_clock_seconds);
    out << buf;
    return out.str();
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

std::string hours(Tick t, double tick_hours) {
    return format_real(static_cast<double>(t) * tick_hours);
}

void write_leader(const DiscretePmf& leader, double tick_hours, const std::filesystem::path& dir) {
    auto out = open_csv(dir / "leader_arrival.csv");
    out << "tick,hours,mass\n";
    const auto m = leader.masses();
    for (std::size_t k = 0; k < m.size(); ++k) {
        const Tick t = leader.offset() + static_cast<Tick>(k);
        out << t << ',' << hours(t, tick_hours) << ',' << format_real(m[k]) << '\n';
    }
}

void write_bounds(const StageBounds& b, const std::filesystem::path& dir) {
    auto out = open_csv(dir / "bounds.csv");
    out << "stage,t_lower,t_upper\n";
    for (std::size_t i = 0; i < b.lower.size(); ++i) {
        out << (i + 1) << ',' << b.lower[i] << ',' << b.upper[i] << '\n';
    }
}

}  // namespace

void export_solution(const SolveResult& result, double tick_hours,
                     const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_leader(result.leader_arrival, tick_hours, dir);
    write_bounds(result.bounds, dir);
    for (std::size_t i = 0; i < result.tables.size(); ++i) {
        const auto& table = result.tables[i];
        auto out = open_csv(dir / ("value_stage_" + std::to_string(i + 1) + ".csv"));
        out << "tick,hours,value,policy_speed\n";
        for (std::size_t a = 0; a < table.values.size(); ++a) {
            const Tick t = table.lower + static_cast<Tick>(a);
            out << t << ',' << hours(t, tick_hours) << ',' << format_real(table.values[a]) << ',';
            if (!table.policy.empty()) {
                out << format_real(table.speeds.at(static_cast<std::size_t>(table.policy[a])));
            }
            out << '\n';
        }
    }
}

void export_correlated(const CorrelatedSolveResult& result, const DiscretePmf& leader_arrival,
                       double tick_hours, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_leader(leader_arrival, tick_hours, dir);
    write_bounds(result.bounds, dir);
    for (std::size_t i = 0; i < result.tables.size(); ++i) {
        const auto& table = result.tables[i];
        auto out = open_csv(dir / ("value_stage_" + std::to_string(i + 1) + ".csv"));
        out << "tick,hours,history,value,policy_speed\n";
        for (const auto& [h, values] : table.values) {
            std::string key;
            for (std::size_t k = 0; k < h.size(); ++k) {
                key += (k ? ";" : "") + std::to_string(h[k]);
            }
            const auto pol = table.policy.find(h);
            for (std::size_t a = 0; a < values.size(); ++a) {
                const Tick t = table.lower + static_cast<Tick>(a);
                out << t << ',' << hours(t, tick_hours) << ',' << key << ','
                    << format_real(values[a]) << ',';
                if (pol != table.policy.end()) {
                    out << format_real(table.speeds.at(static_cast<std::size_t>(pol->second[a])));
                }
                out << '\n';
            }
        }
    }
}

}  // namespace platoon
