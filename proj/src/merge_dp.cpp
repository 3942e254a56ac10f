#include "platoon/merge_dp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace platoon {

void Scenario::validate() const {
    if (leader_route.empty() || follower_route.empty()) {
        throw std::invalid_argument("scenario: both routes need at least one segment");
    }
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
        throw std::invalid_argument("scenario: epsilon must lie in [0, 1)");
    }
    if (delta_t < 0) {
        throw std::invalid_argument("scenario: delta_t must be non-negative");
    }
    if (!(tick_hours > 0.0)) {
        throw std::invalid_argument("scenario: tick duration must be positive");
    }
    if (!(leader_speed > 0.0)) {
        throw std::invalid_argument("scenario: leader speed must be positive");
    }
    for (const auto& s : leader_route) {
        s.validate();
    }
    for (const auto& s : follower_route) {
        s.validate();
        if (speeds.values().front() < s.mixture.v_min ||
            speeds.values().back() > s.mixture.v_max) {
            throw std::invalid_argument("scenario: admissible speeds exceed segment '" +
                                        s.label + "' truncation bounds");
        }
    }
}

void MergeProblem::validate() const {
    if (leader_segments.empty() || follower_segments.empty()) {
        throw std::invalid_argument("problem: both routes need at least one segment");
    }
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
        throw std::invalid_argument("problem: epsilon must lie in [0, 1)");
    }
    if (delta_t < 0) {
        throw std::invalid_argument("problem: delta_t must be non-negative");
    }
}

MergeProblem build_problem(const Scenario& scenario) {
    scenario.validate();
    MergeProblem problem;
    problem.leader_start = scenario.leader_start;
    problem.follower_start = scenario.follower_start;
    problem.delta_t = scenario.delta_t;
    problem.epsilon = scenario.epsilon;
    for (const auto& s : scenario.leader_route) {
        const double v = std::clamp(scenario.leader_speed, s.mixture.v_min, s.mixture.v_max);
        problem.leader_segments.push_back(build_traversal_pmf(s, v, scenario.tick_hours));
    }
    for (const auto& s : scenario.follower_route) {
        problem.follower_segments.push_back(
            build_traversal_model(s, scenario.speeds, scenario.tick_hours));
    }
    return problem;
}

DiscretePmf leader_forward(const MergeProblem& problem) {
    DiscretePmf arrival = delta(problem.leader_start);
    for (const auto& seg : problem.leader_segments) {
        arrival = convolve(arrival, seg);
    }
    return arrival;
}

DiscretePmf leader_forward(const Scenario& scenario) {
    return leader_forward(build_problem(scenario));
}

PlatoonProbability::PlatoonProbability(DiscretePmf leader_arrival, Tick delta_t)
    : arrival_(std::move(leader_arrival)), delta_t_(delta_t) {
    if (delta_t_ < 0) {
        throw std::invalid_argument("delta_t must be non-negative");
    }
    add_ticks(arrival_.last(), delta_t_);
    sub_ticks(arrival_.offset(), delta_t_);
    const auto m = arrival_.masses();
    prefix_.resize(m.size() + 1, 0.0);
    for (std::size_t k = 0; k < m.size(); ++k) {
        prefix_[k + 1] = prefix_[k] + m[k];
    }
}

double PlatoonProbability::operator()(Tick t) const {
    if (t < first_positive() || t > last_positive()) {
        return 0.0;
    }
    const Tick n = static_cast<Tick>(arrival_.size());
    const Tick lo = std::max<Tick>(t - delta_t_ - arrival_.offset(), 0);
    const Tick hi = std::min<Tick>(t + delta_t_ - arrival_.offset() + 1, n);
    if (hi <= lo) {
        return 0.0;
    }
    return std::clamp(prefix_[static_cast<std::size_t>(hi)] - prefix_[static_cast<std::size_t>(lo)],
                      0.0, 1.0);
}

PlatoonProbability platoon_probability(const DiscretePmf& leader_arrival, Tick delta_t) {
    return PlatoonProbability(leader_arrival, delta_t);
}

StageBounds compute_bounds(Tick follower_start, std::span<const Tick> t_mins,
                           const PlatoonProbability& p_pl, double epsilon) {
    const std::size_t n = t_mins.size() + 1;
    StageBounds b;
    b.lower.resize(n);
    b.upper.resize(n);
    b.lower[0] = follower_start;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        b.lower[i + 1] = add_ticks(b.lower[i], t_mins[i]);
    }

    // Smallest T with P_pl(t) <= epsilon for every t > T, searched down to the
    // earliest reachable merge arrival.
    const Tick floor = b.lower[n - 1];
    Tick top = p_pl.last_positive();
    while (top >= floor && p_pl(top) <= epsilon) {
        --top;
    }
    if (top < floor) {
        b.prune_all = true;
        top = floor - 1;
    }
    b.upper[n - 1] = top;
    for (std::size_t i = n - 1; i-- > 0;) {
        b.upper[i] = sub_ticks(b.upper[i + 1], t_mins[i]);
    }
    return b;
}

StageBounds compute_bounds(const MergeProblem& problem, const PlatoonProbability& p_pl,
                           double epsilon) {
    std::vector<Tick> t_mins;
    for (const auto& m : problem.follower_segments) {
        t_mins.push_back(m.t_min());
    }
    return compute_bounds(problem.follower_start, t_mins, p_pl, epsilon);
}

double StageTable::value_at(Tick t) const {
    if (!contains(t)) {
        return 0.0;
    }
    return values[static_cast<std::size_t>(t - lower)];
}

std::int32_t StageTable::policy_index(Tick t) const {
    if (policy.empty() || !contains(t)) {
        throw std::out_of_range("no policy at tick " + std::to_string(t));
    }
    return policy[static_cast<std::size_t>(t - lower)];
}

double StageTable::policy_speed(Tick t) const {
    return speeds.at(static_cast<std::size_t>(policy_index(t)));
}

namespace {

// Expected next-stage value when leaving from window offset `a` under one speed.
// `shift` is (pmf offset - t_min), i.e. the gap between the earliest arrival
// under this speed and the next window's lower bound.
inline double expected_next(std::span<const double> masses, std::size_t shift,
                            std::span<const double> next, std::size_t a) {
    const std::size_t start = a + shift;
    if (start >= next.size()) {
        return 0.0;
    }
    const std::size_t len = std::min(masses.size(), next.size() - start);
    const double* m = masses.data();
    const double* v = next.data() + start;
    double acc = 0.0;
    for (std::size_t j = 0; j < len; ++j) {
        acc += m[j] * v[j];
    }
    return acc;
}

SolveResult solve_with(const MergeProblem& problem, double epsilon) {
    problem.validate();
    SolveResult r;
    r.epsilon = epsilon;
    r.delta_t = problem.delta_t;
    r.leader_arrival = leader_forward(problem);
    const PlatoonProbability p_pl(r.leader_arrival, problem.delta_t);
    r.bounds = compute_bounds(problem, p_pl, epsilon);

    const std::size_t n = problem.stages();
    r.tables.resize(n);
    if (r.bounds.prune_all) {
        for (std::size_t i = 0; i < n; ++i) {
            r.tables[i].lower = r.bounds.lower[i];
            if (i + 1 < n) {
                r.tables[i].speeds = problem.follower_segments[i].speeds();
            }
        }
        r.merge_probability = 0.0;
        r.truncation_ratio = 0.0;
        return r;
    }

    const auto width = static_cast<std::size_t>(r.bounds.width()) + 1;
    {
        auto& terminal = r.tables[n - 1];
        terminal.lower = r.bounds.lower[n - 1];
        terminal.values.resize(width);
        for (std::size_t a = 0; a < width; ++a) {
            terminal.values[a] = p_pl(terminal.lower + static_cast<Tick>(a));
        }
    }

    for (std::size_t i = n - 1; i-- > 0;) {
        const auto& model = problem.follower_segments[i];
        const auto& next = r.tables[i + 1].values;
        auto& table = r.tables[i];
        table.lower = r.bounds.lower[i];
        table.speeds = model.speeds();
        table.values.assign(width, -1.0);
        table.policy.assign(width, 0);

        for (std::size_t k = 0; k < model.size(); ++k) {
            const auto& pmf = model.pmf(k);
            const auto shift = static_cast<std::size_t>(pmf.offset() - model.t_min());
            const auto masses = pmf.masses();
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
            for (std::size_t a = 0; a < width; ++a) {
                const double v = expected_next(masses, shift, next, a);
                // Strict comparison keeps the slowest of tied speeds.
                if (v > table.values[a]) {
                    table.values[a] = v;
                    table.policy[a] = static_cast<std::int32_t>(k);
                }
            }
        }
        for (double& v : table.values) {
            v = std::clamp(v, 0.0, 1.0);
        }
    }

    r.merge_probability = r.tables[0].value_at(problem.follower_start);

    if (epsilon > 0.0) {
        const StageBounds full = compute_bounds(problem, p_pl, 0.0);
        r.truncation_ratio = full.prune_all ? 0.0
                                            : static_cast<double>(full.width() + 1) /
                                                  static_cast<double>(width);
    }
    return r;
}

}  // namespace

SolveResult backward_solve(const MergeProblem& problem) {
    return solve_with(problem, problem.epsilon);
}

SolveResult backward_solve(const Scenario& scenario) {
    return backward_solve(build_problem(scenario));
}

SolveResult exact_solve(const MergeProblem& problem) { return solve_with(problem, 0.0); }

SolveResult exact_solve(const Scenario& scenario) { return exact_solve(build_problem(scenario)); }

DiscretePmf follower_fixed_arrival(const MergeProblem& problem, std::size_t speed_index) {
    DiscretePmf arrival = delta(problem.follower_start);
    for (const auto& model : problem.follower_segments) {
        arrival = convolve(arrival, model.pmf(speed_index));
    }
    return arrival;
}

double evaluate_fixed_policy(const MergeProblem& problem, std::size_t speed_index) {
    problem.validate();
    const PlatoonProbability p_pl(leader_forward(problem), problem.delta_t);
    const DiscretePmf arrival = follower_fixed_arrival(problem, speed_index);
    const auto m = arrival.masses();
    double acc = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        acc += m[k] * p_pl(arrival.offset() + static_cast<Tick>(k));
    }
    return std::clamp(acc, 0.0, 1.0);
}

double evaluate_fixed_policy(const Scenario& scenario, double v_fixed) {
    const std::size_t k = scenario.speeds.index_of(v_fixed);
    return evaluate_fixed_policy(build_problem(scenario), k);
}

}  // namespace platoon
