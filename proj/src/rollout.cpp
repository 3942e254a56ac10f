#include "platoon/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace platoon {

PmfSampler::PmfSampler(const DiscretePmf& pmf) : offset_(pmf.offset()) {
    const auto m = pmf.masses();
    cdf_.resize(m.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        acc += m[k];
        cdf_[k] = acc;
    }
}

Tick PmfSampler::operator()(Rng& rng) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng) * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) {
        --it;
    }
    return offset_ + static_cast<Tick>(it - cdf_.begin());
}

Tick sample_pmf(const DiscretePmf& p, Rng& rng) { return PmfSampler(p)(rng); }

Rng trial_rng(std::uint64_t seed, std::uint64_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
    return Rng(seq);
}

void RolloutConfig::validate() const {
    if (n_trials < 1) {
        throw std::invalid_argument("rollout: n_trials must be at least 1");
    }
}

std::string RolloutReport::to_json() const {
    nlohmann::ordered_json j;
    j["estimate"] = estimate;
    j["standard_error"] = standard_error;
    j["n_merges"] = n_merges;
    j["n_trials"] = n_trials;
    j["n_abandoned"] = n_abandoned;
    auto& hist = j["histograms"] = nlohmann::ordered_json::array();
    for (const auto& h : histograms) {
        auto stage = nlohmann::ordered_json::array();
        for (const auto& [tick, count] : h) {
            stage.push_back({tick, count});
        }
        hist.push_back(std::move(stage));
    }
    return j.dump();
}

namespace {

void finish(RolloutReport& r) {
    const double n = static_cast<double>(r.n_trials);
    r.estimate = static_cast<double>(r.n_merges) / n;
    r.standard_error = std::sqrt(r.estimate * (1.0 - r.estimate) / n);
}

std::vector<std::vector<PmfSampler>> follower_samplers(const MergeProblem& problem) {
    std::vector<std::vector<PmfSampler>> out;
    for (const auto& model : problem.follower_segments) {
        auto& stage = out.emplace_back();
        for (const auto& pmf : model.pmfs()) {
            stage.emplace_back(pmf);
        }
    }
    return out;
}

}  // namespace

RolloutReport run_rollouts(const MergeProblem& problem, const DiscretePmf& leader_arrival,
                           const SolveResult& solved, const RolloutConfig& config) {
    config.validate();
    if (config.fixed_speed_index) {
        return run_fixed_rollouts(problem, leader_arrival, config);
    }
    const std::size_t n = problem.stages();
    if (solved.tables.size() != n || solved.bounds.lower.size() != n) {
        throw std::invalid_argument("rollout: solved tables do not match the problem");
    }
    const PmfSampler leader(leader_arrival);
    const auto samplers = follower_samplers(problem);

    RolloutReport r;
    r.n_trials = config.n_trials;
    r.histograms.resize(n);
    for (std::uint64_t trial = 0; trial < config.n_trials; ++trial) {
        Rng rng = trial_rng(config.seed, trial);
        const Tick t_leader = leader(rng);
        Tick t = problem.follower_start;
        bool alive = !solved.pruned();
        for (std::size_t i = 0; alive && i < n; ++i) {
            if (t < solved.bounds.lower[i]) {
                throw std::logic_error("rollout: arrival " + std::to_string(t) +
                                       " below reachable bound at stage " + std::to_string(i));
            }
            ++r.histograms[i][t];
            if (t > solved.bounds.upper[i]) {
                alive = false;
                break;
            }
            if (i + 1 < n) {
                const auto k = static_cast<std::size_t>(solved.tables[i].policy_index(t));
                t += samplers[i][k](rng);
            }
        }
        if (!alive) {
            ++r.n_abandoned;
            continue;
        }
        if (std::abs(t_leader - t) <= problem.delta_t) {
            ++r.n_merges;
        }
    }
    finish(r);
    return r;
}

RolloutReport run_fixed_rollouts(const MergeProblem& problem, const DiscretePmf& leader_arrival,
                                 const RolloutConfig& config) {
    config.validate();
    if (!config.fixed_speed_index) {
        throw std::invalid_argument("rollout: fixed speed index not set");
    }
    const std::size_t k = *config.fixed_speed_index;
    const std::size_t n = problem.stages();
    const PmfSampler leader(leader_arrival);
    std::vector<PmfSampler> samplers;
    for (const auto& model : problem.follower_segments) {
        samplers.emplace_back(model.pmf(k));
    }

    RolloutReport r;
    r.n_trials = config.n_trials;
    r.histograms.resize(n);
    for (std::uint64_t trial = 0; trial < config.n_trials; ++trial) {
        Rng rng = trial_rng(config.seed, trial);
        const Tick t_leader = leader(rng);
        Tick t = problem.follower_start;
        ++r.histograms[0][t];
        for (std::size_t i = 0; i + 1 < n; ++i) {
            t += samplers[i](rng);
            ++r.histograms[i + 1][t];
        }
        if (std::abs(t_leader - t) <= problem.delta_t) {
            ++r.n_merges;
        }
    }
    finish(r);
    return r;
}

}  // namespace platoon
