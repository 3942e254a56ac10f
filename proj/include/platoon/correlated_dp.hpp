#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "platoon/merge_dp.hpp"
#include "platoon/pmf.hpp"
#include "platoon/travel_model.hpp"

namespace platoon {

/// Upstream traversal times, most recent first: [T^{i-1}, ..., T^{i-H}].
/// Components are ticks, or regime indices once quantized.
using History = std::vector<std::int64_t>;

/// Probability of each initial history.
using HistoryDistribution = std::map<History, double>;

struct HistoryState {
    Tick arrival = 0;
    History history;
    bool quantized = false;
};

/// Maps a traversal tick onto a traffic regime index.
///
/// Label k covers ticks in [thresholds[k-1], thresholds[k]); ticks below the
/// first threshold get label 0 and ticks at or above the last get the final label.
class RegimeQuantizer {
public:
    RegimeQuantizer(std::vector<Tick> thresholds, std::vector<std::string> labels);
    /// Free flow / synchronized / congested split.
    static RegimeQuantizer three_regime(Tick synchronized_from, Tick congested_from);

    std::int64_t label_of(Tick traversal) const;
    const std::string& name(std::int64_t label) const { return labels_.at(static_cast<std::size_t>(label)); }
    std::size_t size() const { return labels_.size(); }
    const std::vector<Tick>& thresholds() const { return thresholds_; }
    const std::vector<std::string>& labels() const { return labels_; }

private:
    std::vector<Tick> thresholds_;
    std::vector<std::string> labels_;
};

/// Replaces every history tick by its regime; a no-op on quantized states.
HistoryState quantize_history(const HistoryState& state, const RegimeQuantizer& q);

/**
 * Traversal PMFs of one segment conditioned on the upstream history.
 *
 * Each entry holds one PMF per speed. Histories without an entry fall back to
 * the default row when one is set. When a quantizer is attached, this segment's
 * own traversal time enters downstream histories as a regime index.
 */
class ConditionalTraversalModel {
public:
    ConditionalTraversalModel(std::size_t history_length, std::vector<double> speeds,
                              std::optional<RegimeQuantizer> quantizer = std::nullopt);

    /// History-independent model built from an ordinary traversal model.
    static ConditionalTraversalModel independent(const TraversalModel& model,
                                                 std::size_t history_length,
                                                 std::optional<RegimeQuantizer> quantizer = std::nullopt);

    void add(History history, std::vector<DiscretePmf> per_speed);
    void set_default(std::vector<DiscretePmf> per_speed);

    const DiscretePmf& pmf(std::size_t speed_index, const History& history) const;
    bool has_row(const History& history) const;

    std::size_t history_length() const { return history_length_; }
    const std::vector<double>& speeds() const { return speeds_; }
    const std::map<History, std::vector<DiscretePmf>>& rows() const { return rows_; }
    const std::optional<RegimeQuantizer>& quantizer() const { return quantizer_; }

    /// History component recorded for a traversal of `tau` ticks.
    std::int64_t record(Tick tau) const;
    /// History seen by the next segment after traversing in `tau` ticks.
    History advance(const History& history, Tick tau) const;

    /// Earliest support tick over all rows and speeds.
    Tick t_min() const;

private:
    void check_row(const std::vector<DiscretePmf>& per_speed) const;

    std::size_t history_length_;
    std::vector<double> speeds_;
    std::optional<RegimeQuantizer> quantizer_;
    std::map<History, std::vector<DiscretePmf>> rows_;
    std::optional<std::vector<DiscretePmf>> default_row_;
};

/// Non-normalized arrival masses for one history value.
struct ArrivalMasses {
    Tick offset = 0;
    std::vector<double> masses;

    void add(Tick t, double mass);
    double total() const;
    double at(Tick t) const;
};

/// Joint distribution of (arrival tick, history) at one stage.
struct JointArrival {
    std::map<History, ArrivalMasses> by_history;

    double total() const;
    DiscretePmf marginal() const;
};

/// Propagates the joint (arrival, history) distribution through every segment
/// at a fixed speed index. Returns one joint per stage, the first being the start.
std::vector<JointArrival> correlated_forward(Tick start,
                                             std::span<const ConditionalTraversalModel> models,
                                             const HistoryDistribution& prior,
                                             std::size_t speed_index = 0);

struct CorrelatedProblem {
    DiscretePmf leader_arrival = delta(0);
    Tick delta_t = 0;
    double epsilon = 0.0;
    std::vector<ConditionalTraversalModel> follower_segments;
    Tick follower_start = 0;
    HistoryDistribution initial_history;
    /// Cap on (arrival tick, history) cells summed over all stages.
    std::size_t max_states = 20'000'000;
    /// Largest accepted H and quantizer label count.
    std::size_t max_history_length = 2;
    std::size_t max_regimes = 3;

    std::size_t stages() const { return follower_segments.size() + 1; }
    void validate() const;
};

struct CorrelatedStageTable {
    Tick lower = 0;
    Tick upper = -1;
    std::map<History, std::vector<double>> values;
    std::map<History, std::vector<std::int32_t>> policy;
    std::vector<double> speeds;

    /// Zero outside the window or for unreachable histories.
    double value_at(Tick t, const History& h) const;
    std::int32_t policy_index(Tick t, const History& h) const;
};

struct CorrelatedSolveResult {
    double merge_probability = 0.0;
    StageBounds bounds;
    std::vector<CorrelatedStageTable> tables;
    std::size_t state_count = 0;
    bool pruned() const { return bounds.prune_all; }
};

CorrelatedSolveResult correlated_backward_solve(const CorrelatedProblem& problem);

/// Stationary distribution of the history chain a model induces on itself at
/// one speed. Every successor history must have a row.
HistoryDistribution stationary_history(const ConditionalTraversalModel& model,
                                       std::size_t speed_index);

}  // namespace platoon
