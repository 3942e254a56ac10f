#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "platoon/merge_dp.hpp"
#include "platoon/pmf.hpp"

namespace platoon {

using Rng = std::mt19937_64;

/// Inverse-CDF sampler over a fixed PMF.
class PmfSampler {
public:
    explicit PmfSampler(const DiscretePmf& pmf);
    Tick operator()(Rng& rng) const;

private:
    Tick offset_;
    std::vector<double> cdf_;
};

/// One inverse-CDF draw.
Tick sample_pmf(const DiscretePmf& p, Rng& rng);

/// Generator for trial `trial` of a run seeded with `seed`. Serial and
/// parallel runs see the same stream per trial.
Rng trial_rng(std::uint64_t seed, std::uint64_t trial);

struct RolloutConfig {
    std::uint64_t n_trials = 10000;
    std::uint64_t seed = 0;
    /// When set, every segment uses this speed index and no window is enforced.
    std::optional<std::size_t> fixed_speed_index;

    void validate() const;
};

struct RolloutReport {
    double estimate = 0.0;
    double standard_error = 0.0;
    std::uint64_t n_merges = 0;
    std::uint64_t n_trials = 0;
    /// Trials abandoned because an arrival fell past its stage window.
    std::uint64_t n_abandoned = 0;
    /// Per stage, arrival tick -> trial count.
    std::vector<std::map<Tick, std::uint64_t>> histograms;

    std::string to_json() const;
};

/// Simulates follower trips against a leader drawn from `leader_arrival`.
/// With a table policy, the speed at each stage is read from `solved` at the
/// current arrival tick, and an arrival past the stage window ends the trial
/// as a failed merge.
RolloutReport run_rollouts(const MergeProblem& problem, const DiscretePmf& leader_arrival,
                           const SolveResult& solved, const RolloutConfig& config);

/// Fixed-speed rollouts; `solved` is not needed.
RolloutReport run_fixed_rollouts(const MergeProblem& problem, const DiscretePmf& leader_arrival,
                                 const RolloutConfig& config);

}  // namespace platoon
