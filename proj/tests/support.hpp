// Shared generators and brute-force oracles for the test suites. Nothing here
// calls into the solver's recursion; oracles are written from the definitions.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "platoon/correlated_dp.hpp"
#include "platoon/merge_dp.hpp"
#include "platoon/pmf.hpp"
#include "platoon/travel_model.hpp"

namespace platoon::testing {

inline DiscretePmf random_pmf(std::mt19937_64& rng, std::size_t max_len, Tick min_offset,
                              Tick max_offset) {
    std::uniform_int_distribution<std::size_t> len_dist(1, max_len);
    std::uniform_int_distribution<Tick> off_dist(min_offset, max_offset);
    std::uniform_real_distribution<double> mass(0.0, 1.0);
    const std::size_t n = len_dist(rng);
    std::vector<double> m(n);
    for (auto& x : m) {
        x = mass(rng);
    }
    // Endpoints strictly positive; interior may hold exact zeros.
    m.front() += 0.05;
    m.back() += 0.05;
    if (n > 2 && mass(rng) < 0.3) {
        m[n / 2] = 0.0;
    }
    return normalize(off_dist(rng), m);
}

/// Map-based PMF oracle representation.
using MassMap = std::map<Tick, double>;

inline MassMap to_map(const DiscretePmf& p) {
    MassMap out;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p.masses()[k] != 0.0) {
            out[p.offset() + static_cast<Tick>(k)] = p.masses()[k];
        }
    }
    return out;
}

inline MassMap convolve_oracle(const DiscretePmf& a, const DiscretePmf& b) {
    MassMap out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[a.offset() + static_cast<Tick>(i) + b.offset() + static_cast<Tick>(j)] +=
                a.masses()[i] * b.masses()[j];
        }
    }
    return out;
}

/// P_pl straight from the definition.
inline double window_sum_oracle(const DiscretePmf& leader, Tick delta_t, Tick t) {
    double s = 0.0;
    for (Tick tau = t - delta_t; tau <= t + delta_t; ++tau) {
        s += leader.at(tau);
    }
    return s;
}

/// Leader arrival by enumerating every combination of segment traversals.
inline MassMap leader_enumeration_oracle(Tick start, const std::vector<DiscretePmf>& segments) {
    MassMap out;
    std::function<void(std::size_t, Tick, double)> rec = [&](std::size_t i, Tick t, double p) {
        if (i == segments.size()) {
            out[t] += p;
            return;
        }
        const auto& s = segments[i];
        for (std::size_t k = 0; k < s.size(); ++k) {
            rec(i + 1, t + s.offset() + static_cast<Tick>(k), p * s.masses()[k]);
        }
    };
    rec(0, start, 1.0);
    return out;
}

/// Optimal closed-loop merge probability by recursion over every arrival
/// history (no tables, no windows).
inline double closed_loop_oracle(const MergeProblem& problem) {
    const MassMap leader = leader_enumeration_oracle(problem.leader_start, problem.leader_segments);
    auto p_pl = [&](Tick t) {
        double s = 0.0;
        for (const auto& [tau, m] : leader) {
            if (std::abs(tau - t) <= problem.delta_t) {
                s += m;
            }
        }
        return s;
    };
    std::function<double(std::size_t, Tick)> value = [&](std::size_t i, Tick t) -> double {
        if (i == problem.follower_segments.size()) {
            return p_pl(t);
        }
        const auto& model = problem.follower_segments[i];
        double best = 0.0;
        for (const auto& pmf : model.pmfs()) {
            double e = 0.0;
            for (std::size_t k = 0; k < pmf.size(); ++k) {
                e += pmf.masses()[k] * value(i + 1, t + pmf.offset() + static_cast<Tick>(k));
            }
            best = std::max(best, e);
        }
        return best;
    };
    return value(0, problem.follower_start);
}

/// Best open-loop plan: every speed sequence, evaluated by enumeration.
inline double open_loop_oracle(const MergeProblem& problem) {
    const MassMap leader = leader_enumeration_oracle(problem.leader_start, problem.leader_segments);
    const std::size_t n = problem.follower_segments.size();
    std::vector<std::size_t> choice(n, 0);
    double best = 0.0;
    while (true) {
        std::vector<DiscretePmf> segs;
        for (std::size_t i = 0; i < n; ++i) {
            segs.push_back(problem.follower_segments[i].pmf(choice[i]));
        }
        const MassMap follower = leader_enumeration_oracle(problem.follower_start, segs);
        double v = 0.0;
        for (const auto& [tf, pf] : follower) {
            for (const auto& [tl, pl] : leader) {
                if (std::abs(tl - tf) <= problem.delta_t) {
                    v += pf * pl;
                }
            }
        }
        best = std::max(best, v);
        std::size_t i = 0;
        while (i < n && ++choice[i] == problem.follower_segments[i].size()) {
            choice[i++] = 0;
        }
        if (i == n) {
            break;
        }
    }
    return best;
}

/// Small synthetic problem with `segments` follower segments, `speeds` actions
/// and PMF supports up to `max_support`.
inline MergeProblem random_problem(std::mt19937_64& rng, std::size_t segments, std::size_t speeds,
                                   std::size_t max_support, double epsilon) {
    MergeProblem p;
    std::uniform_int_distribution<std::size_t> n_leader(1, 3);
    const std::size_t nl = n_leader(rng);
    for (std::size_t i = 0; i < nl; ++i) {
        p.leader_segments.push_back(random_pmf(rng, max_support + 2, 3, 8));
    }
    p.leader_start = 0;
    for (std::size_t i = 0; i < segments; ++i) {
        std::vector<double> vs;
        std::vector<DiscretePmf> pmfs;
        for (std::size_t k = 0; k < speeds; ++k) {
            vs.push_back(70.0 + static_cast<double>(k));
            pmfs.push_back(random_pmf(rng, max_support, 2, 7));
        }
        p.follower_segments.emplace_back(std::move(vs), std::move(pmfs));
    }
    // Start the follower so the nominal arrivals overlap the leader's.
    const double leader_mean = 5.5 * static_cast<double>(nl) + 0.5 * static_cast<double>(max_support);
    const double follower_mean = 4.5 * static_cast<double>(segments) + 0.5 * static_cast<double>(max_support) * static_cast<double>(segments);
    std::uniform_int_distribution<Tick> jitter(-3, 3);
    p.follower_start = static_cast<Tick>(std::lround(leader_mean - follower_mean)) + jitter(rng);
    std::uniform_int_distribution<Tick> dt(0, 2);
    p.delta_t = dt(rng);
    p.epsilon = epsilon;
    return p;
}

inline Scenario reference_scenario(bool unreliable_second_segment) {
    const auto R = SpeedMixture::reliable();
    Scenario s;
    s.leader_route = {{4.0, R, "L1"}, {4.0, R, "L2"}, {5.0, R, "L3"}};
    s.follower_route = {{6.0, R, "F1"},
                        {4.0, unreliable_second_segment ? SpeedMixture::unreliable() : R, "F2"},
                        {5.0, R, "F3"}};
    s.leader_speed = 80.0;
    s.leader_start = 0;
    // Both reach the merge point together at a constant 80 km/h: (13 - 15) km / 80 km/h.
    s.follower_start = -250;
    s.speeds = SpeedSet::range(70.0, 90.0, 1.0);
    s.delta_t = 100;
    s.epsilon = 0.01;
    s.tick_hours = 1e-4;
    return s;
}

/// Correlated problem whose tables ignore the history.
inline CorrelatedProblem independent_version(const MergeProblem& p, std::size_t h,
                                      HistoryDistribution prior) {
    CorrelatedProblem c;
    c.leader_arrival = leader_forward(p);
    c.delta_t = p.delta_t;
    c.epsilon = p.epsilon;
    c.follower_start = p.follower_start;
    for (const auto& m : p.follower_segments) {
        c.follower_segments.push_back(ConditionalTraversalModel::independent(m, h));
    }
    c.initial_history = std::move(prior);
    return c;
}

// Two-segment follower where a slow first traversal makes the second slow too.
inline CorrelatedProblem correlated_toy(const DiscretePmf& leader) {
    const std::vector<double> speeds{70.0, 90.0};
    ConditionalTraversalModel first(1, speeds);
    first.set_default({DiscretePmf::from_masses(10, {0.5, 0.0, 0.5}),
                       DiscretePmf::from_masses(9, {0.5, 0.0, 0.5})});
    ConditionalTraversalModel second(1, speeds);
    for (Tick prev : {9, 10, 11, 12}) {
        const bool slow = prev >= 11;
        second.add({prev}, {DiscretePmf::from_masses(slow ? 11 : 9, {0.8, 0.2}),
                            DiscretePmf::from_masses(slow ? 10 : 8, {0.8, 0.2})});
    }
    CorrelatedProblem c;
    c.leader_arrival = leader;
    c.delta_t = 1;
    c.epsilon = 0.0;
    c.follower_start = 0;
    c.follower_segments = {first, second};
    c.initial_history = {{{0}, 1.0}};
    return c;
}

// Joint enumeration over traversal outcomes with the closed-loop max taken at
// every (stage, arrival, history) node.
inline double enumerate_correlated(const CorrelatedProblem& c) {
    auto p_pl = [&](Tick t) { return window_sum_oracle(c.leader_arrival, c.delta_t, t); };
    std::function<double(std::size_t, Tick, const History&)> value =
        [&](std::size_t i, Tick t, const History& h) -> double {
        if (i == c.follower_segments.size()) {
            return p_pl(t);
        }
        const auto& m = c.follower_segments[i];
        double best = 0.0;
        for (std::size_t k = 0; k < m.speeds().size(); ++k) {
            const auto& pmf = m.pmf(k, h);
            double e = 0.0;
            for (std::size_t j = 0; j < pmf.size(); ++j) {
                const Tick tau = pmf.offset() + static_cast<Tick>(j);
                History nh{m.quantizer() ? m.quantizer()->label_of(tau) : tau};
                nh.insert(nh.end(), h.begin(), h.end() - 1);
                e += pmf.masses()[j] * value(i + 1, t + tau, nh);
            }
            best = std::max(best, e);
        }
        return best;
    };
    double total = 0.0;
    for (const auto& [h, p] : c.initial_history) {
        total += p * value(0, c.follower_start, h);
    }
    return total;
}

}  // namespace platoon::testing
