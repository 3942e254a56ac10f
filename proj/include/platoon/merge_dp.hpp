#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "platoon/pmf.hpp"
#include "platoon/travel_model.hpp"

namespace platoon {

/// Physical description of a leader/follower merge, in km, km/h and ticks.
struct Scenario {
    std::vector<SegmentSpec> leader_route;
    double leader_speed = 80.0;
    Tick leader_start = 0;
    std::vector<SegmentSpec> follower_route;
    Tick follower_start = 0;
    SpeedSet speeds{{80.0}};
    Tick delta_t = 0;
    double epsilon = 0.01;
    double tick_hours = 1e-4;

    void validate() const;
};

/**
 * Discretized merge problem: the leader's per-segment traversal PMFs at its
 * fixed speed and the follower's per-segment, per-speed traversal models.
 * Scenarios are lowered to this form by build_problem(); tests build it
 * directly from synthetic PMFs.
 */
struct MergeProblem {
    std::vector<DiscretePmf> leader_segments;
    Tick leader_start = 0;
    std::vector<TraversalModel> follower_segments;
    Tick follower_start = 0;
    Tick delta_t = 0;
    double epsilon = 0.0;

    /// Number of follower stages N_f (segments + 1, the last being the merge point).
    std::size_t stages() const { return follower_segments.size() + 1; }
    void validate() const;
};

/// The leader uses v_l clamped into each segment's [v_min, v_max].
MergeProblem build_problem(const Scenario& scenario);

/// Leader arrival distribution at the merge point.
DiscretePmf leader_forward(const MergeProblem& problem);
DiscretePmf leader_forward(const Scenario& scenario);

/// P_pl(t): leader mass within [t - delta_t, t + delta_t], bounds inclusive.
class PlatoonProbability {
public:
    PlatoonProbability(DiscretePmf leader_arrival, Tick delta_t);

    double operator()(Tick t) const;
    /// Largest t with P_pl(t) > 0.
    Tick last_positive() const { return arrival_.last() + delta_t_; }
    Tick first_positive() const { return arrival_.offset() - delta_t_; }
    Tick delta_t() const { return delta_t_; }
    const DiscretePmf& leader_arrival() const { return arrival_; }

private:
    DiscretePmf arrival_;
    Tick delta_t_;
    std::vector<double> prefix_;
};

PlatoonProbability platoon_probability(const DiscretePmf& leader_arrival, Tick delta_t);

/// Per-stage windows [lower[i], upper[i]], i = 0 .. N_f - 1.
struct StageBounds {
    std::vector<Tick> lower;
    std::vector<Tick> upper;
    /// Set when the terminal window is empty: no arrival has P_pl above epsilon.
    bool prune_all = false;

    /// upper - lower, identical for every stage.
    Tick width() const { return upper.front() - lower.front(); }
};

/// `t_mins[i]` is the earliest traversal tick of follower segment i over all speeds.
StageBounds compute_bounds(Tick follower_start, std::span<const Tick> t_mins,
                           const PlatoonProbability& p_pl, double epsilon);
StageBounds compute_bounds(const MergeProblem& problem, const PlatoonProbability& p_pl,
                           double epsilon);

/// Value function of one stage sampled densely over its window.
struct StageTable {
    Tick lower = 0;
    std::vector<double> values;
    /// Index into speeds of the maximizing action; empty at the merge stage.
    std::vector<std::int32_t> policy;
    std::vector<double> speeds;

    Tick upper() const { return lower + static_cast<Tick>(values.size()) - 1; }
    bool contains(Tick t) const { return t >= lower && t <= upper(); }
    /// Zero outside the window.
    double value_at(Tick t) const;
    /// Throws std::out_of_range outside the window or at the merge stage.
    double policy_speed(Tick t) const;
    std::int32_t policy_index(Tick t) const;
};

struct SolveResult {
    double merge_probability = 0.0;
    StageBounds bounds;
    std::vector<StageTable> tables;
    DiscretePmf leader_arrival = delta(0);
    /// Window width without truncation divided by the truncated width.
    double truncation_ratio = 1.0;
    double epsilon = 0.0;
    Tick delta_t = 0;
    bool pruned() const { return bounds.prune_all; }
};

SolveResult backward_solve(const MergeProblem& problem);
SolveResult backward_solve(const Scenario& scenario);

/// backward_solve with epsilon forced to zero.
SolveResult exact_solve(const MergeProblem& problem);
SolveResult exact_solve(const Scenario& scenario);

/// Expected P_pl when the follower holds one speed on every segment.
double evaluate_fixed_policy(const MergeProblem& problem, std::size_t speed_index);
double evaluate_fixed_policy(const Scenario& scenario, double v_fixed);

/// Follower arrival distribution at the merge point under a constant speed.
DiscretePmf follower_fixed_arrival(const MergeProblem& problem, std::size_t speed_index);

}  // namespace platoon
