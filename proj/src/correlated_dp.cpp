#include "platoon/correlated_dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace platoon {

RegimeQuantizer::RegimeQuantizer(std::vector<Tick> thresholds, std::vector<std::string> labels)
    : thresholds_(std::move(thresholds)), labels_(std::move(labels)) {
    if (labels_.size() != thresholds_.size() + 1) {
        throw std::invalid_argument("quantizer: need exactly one more label than thresholds");
    }
    if (!std::is_sorted(thresholds_.begin(), thresholds_.end(), std::less_equal<>())) {
        throw std::invalid_argument("quantizer: thresholds must be strictly increasing");
    }
}

RegimeQuantizer RegimeQuantizer::three_regime(Tick synchronized_from, Tick congested_from) {
    return RegimeQuantizer({synchronized_from, congested_from},
                           {"free flow", "synchronized", "congested"});
}

std::int64_t RegimeQuantizer::label_of(Tick traversal) const {
    return static_cast<std::int64_t>(
        std::upper_bound(thresholds_.begin(), thresholds_.end(), traversal) - thresholds_.begin());
}

HistoryState quantize_history(const HistoryState& state, const RegimeQuantizer& q) {
    if (state.quantized) {
        return state;
    }
    HistoryState out = state;
    for (auto& h : out.history) {
        h = q.label_of(h);
    }
    out.quantized = true;
    return out;
}

ConditionalTraversalModel::ConditionalTraversalModel(std::size_t history_length,
                                                     std::vector<double> speeds,
                                                     std::optional<RegimeQuantizer> quantizer)
    : history_length_(history_length), speeds_(std::move(speeds)), quantizer_(std::move(quantizer)) {
    if (history_length_ < 1) {
        throw std::invalid_argument("conditional model: history length must be at least 1");
    }
    if (speeds_.empty() ||
        !std::is_sorted(speeds_.begin(), speeds_.end(), std::less_equal<>())) {
        throw std::invalid_argument("conditional model: speeds must be nonempty and increasing");
    }
}

ConditionalTraversalModel ConditionalTraversalModel::independent(
    const TraversalModel& model, std::size_t history_length,
    std::optional<RegimeQuantizer> quantizer) {
    ConditionalTraversalModel out(history_length, model.speeds(), std::move(quantizer));
    out.set_default(model.pmfs());
    return out;
}

void ConditionalTraversalModel::check_row(const std::vector<DiscretePmf>& per_speed) const {
    if (per_speed.size() != speeds_.size()) {
        throw std::invalid_argument("conditional model: need one pmf per speed");
    }
}

void ConditionalTraversalModel::add(History history, std::vector<DiscretePmf> per_speed) {
    if (history.size() != history_length_) {
        throw std::invalid_argument("conditional model: history length mismatch");
    }
    check_row(per_speed);
    rows_.insert_or_assign(std::move(history), std::move(per_speed));
}

void ConditionalTraversalModel::set_default(std::vector<DiscretePmf> per_speed) {
    check_row(per_speed);
    default_row_ = std::move(per_speed);
}

bool ConditionalTraversalModel::has_row(const History& history) const {
    return default_row_.has_value() || rows_.contains(history);
}

const DiscretePmf& ConditionalTraversalModel::pmf(std::size_t speed_index,
                                                  const History& history) const {
    if (const auto it = rows_.find(history); it != rows_.end()) {
        return it->second.at(speed_index);
    }
    if (default_row_) {
        return default_row_->at(speed_index);
    }
    throw std::out_of_range("conditional model: no row for history");
}

std::int64_t ConditionalTraversalModel::record(Tick tau) const {
    return quantizer_ ? quantizer_->label_of(tau) : tau;
}

History ConditionalTraversalModel::advance(const History& history, Tick tau) const {
    History out;
    out.reserve(history.size());
    out.push_back(record(tau));
    out.insert(out.end(), history.begin(), history.end() - 1);
    return out;
}

Tick ConditionalTraversalModel::t_min() const {
    Tick best = std::numeric_limits<Tick>::max();
    auto scan = [&](const std::vector<DiscretePmf>& row) {
        for (const auto& p : row) {
            best = std::min(best, p.offset());
        }
    };
    for (const auto& [h, row] : rows_) {
        scan(row);
    }
    if (default_row_) {
        scan(*default_row_);
    }
    if (best == std::numeric_limits<Tick>::max()) {
        throw std::logic_error("conditional model has no rows");
    }
    return best;
}

void ArrivalMasses::add(Tick t, double mass) {
    if (masses.empty()) {
        offset = t;
        masses.push_back(mass);
        return;
    }
    if (t < offset) {
        masses.insert(masses.begin(), static_cast<std::size_t>(offset - t), 0.0);
        offset = t;
    }
    const auto k = static_cast<std::size_t>(t - offset);
    if (k >= masses.size()) {
        masses.resize(k + 1, 0.0);
    }
    masses[k] += mass;
}

double ArrivalMasses::total() const {
    double s = 0.0;
    for (double m : masses) {
        s += m;
    }
    return s;
}

double ArrivalMasses::at(Tick t) const {
    if (t < offset || t >= offset + static_cast<Tick>(masses.size())) {
        return 0.0;
    }
    return masses[static_cast<std::size_t>(t - offset)];
}

double JointArrival::total() const {
    double s = 0.0;
    for (const auto& [h, m] : by_history) {
        s += m.total();
    }
    return s;
}

DiscretePmf JointArrival::marginal() const {
    ArrivalMasses sum;
    for (const auto& [h, m] : by_history) {
        for (std::size_t k = 0; k < m.masses.size(); ++k) {
            sum.add(m.offset + static_cast<Tick>(k), m.masses[k]);
        }
    }
    return normalize(sum.offset, sum.masses);
}

namespace {

void check_prior(const HistoryDistribution& prior, std::size_t h) {
    if (prior.empty()) {
        throw std::invalid_argument("initial history distribution is empty");
    }
    double total = 0.0;
    for (const auto& [hist, p] : prior) {
        if (hist.size() != h) {
            throw std::invalid_argument("initial history length does not match H");
        }
        if (!(p >= 0.0)) {
            throw std::invalid_argument("initial history probabilities must be non-negative");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("initial history distribution must sum to 1");
    }
}

void check_models(std::span<const ConditionalTraversalModel> models) {
    if (models.empty()) {
        throw std::invalid_argument("correlated route needs at least one segment");
    }
    const std::size_t h = models.front().history_length();
    for (const auto& m : models) {
        if (m.history_length() != h) {
            throw std::invalid_argument("conditional models disagree on history length H");
        }
    }
}

}  // namespace

std::vector<JointArrival> correlated_forward(Tick start,
                                             std::span<const ConditionalTraversalModel> models,
                                             const HistoryDistribution& prior,
                                             std::size_t speed_index) {
    check_models(models);
    check_prior(prior, models.front().history_length());

    std::vector<JointArrival> stages(1);
    for (const auto& [h, p] : prior) {
        if (p > 0.0) {
            stages[0].by_history[h].add(start, p);
        }
    }
    for (const auto& model : models) {
        JointArrival next;
        for (const auto& [h, arrivals] : stages.back().by_history) {
            const DiscretePmf& pmf = model.pmf(speed_index, h);
            const auto pm = pmf.masses();
            for (std::size_t j = 0; j < pm.size(); ++j) {
                const Tick tau = pmf.offset() + static_cast<Tick>(j);
                auto& dst = next.by_history[model.advance(h, tau)];
                for (std::size_t k = 0; k < arrivals.masses.size(); ++k) {
                    if (arrivals.masses[k] > 0.0) {
                        dst.add(add_ticks(arrivals.offset + static_cast<Tick>(k), tau),
                                arrivals.masses[k] * pm[j]);
                    }
                }
            }
        }
        stages.push_back(std::move(next));
    }
    return stages;
}

void CorrelatedProblem::validate() const {
    check_models(follower_segments);
    check_prior(initial_history, follower_segments.front().history_length());
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
        throw std::invalid_argument("problem: epsilon must lie in [0, 1)");
    }
    if (delta_t < 0) {
        throw std::invalid_argument("problem: delta_t must be non-negative");
    }
    for (std::size_t i = 1; i < follower_segments.size(); ++i) {
        if (follower_segments[i].speeds() != follower_segments[0].speeds()) {
            throw std::invalid_argument("conditional models disagree on the speed set");
        }
    }
    if (follower_segments.front().history_length() > max_history_length) {
        throw std::invalid_argument("history length H = " +
                                    std::to_string(follower_segments.front().history_length()) +
                                    " exceeds the cap of " + std::to_string(max_history_length));
    }
    for (const auto& m : follower_segments) {
        if (m.quantizer() && m.quantizer()->size() > max_regimes) {
            throw std::invalid_argument("quantizer has " + std::to_string(m.quantizer()->size()) +
                                        " regimes, cap is " + std::to_string(max_regimes));
        }
    }
}

double CorrelatedStageTable::value_at(Tick t, const History& h) const {
    if (t < lower || t > upper) {
        return 0.0;
    }
    const auto it = values.find(h);
    if (it == values.end()) {
        return 0.0;
    }
    return it->second[static_cast<std::size_t>(t - lower)];
}

std::int32_t CorrelatedStageTable::policy_index(Tick t, const History& h) const {
    const auto it = policy.find(h);
    if (it == policy.end() || t < lower || t > upper) {
        throw std::out_of_range("no policy for this state");
    }
    return it->second[static_cast<std::size_t>(t - lower)];
}

CorrelatedSolveResult correlated_backward_solve(const CorrelatedProblem& problem) {
    problem.validate();
    const auto& models = problem.follower_segments;
    const std::size_t n = problem.stages();
    const std::size_t n_speeds = models.front().speeds().size();

    CorrelatedSolveResult r;
    const PlatoonProbability p_pl(problem.leader_arrival, problem.delta_t);
    std::vector<Tick> t_mins;
    for (const auto& m : models) {
        t_mins.push_back(m.t_min());
    }
    r.bounds = compute_bounds(problem.follower_start, t_mins, p_pl, problem.epsilon);
    r.tables.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.tables[i].lower = r.bounds.lower[i];
        r.tables[i].upper = r.bounds.upper[i];
        if (i + 1 < n) {
            r.tables[i].speeds = models[i].speeds();
        }
    }
    if (r.bounds.prune_all) {
        return r;
    }
    const auto width = static_cast<std::size_t>(r.bounds.width()) + 1;

    // Histories reachable at each stage under any speed.
    std::vector<std::set<History>> reachable(n);
    for (const auto& [h, p] : problem.initial_history) {
        if (p > 0.0) {
            reachable[0].insert(h);
        }
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (const auto& h : reachable[i]) {
            for (std::size_t k = 0; k < n_speeds; ++k) {
                const DiscretePmf& pmf = models[i].pmf(k, h);
                for (std::size_t j = 0; j < pmf.size(); ++j) {
                    reachable[i + 1].insert(
                        models[i].advance(h, pmf.offset() + static_cast<Tick>(j)));
                }
            }
        }
    }
    for (const auto& set : reachable) {
        r.state_count += set.size() * width;
        if (r.state_count > problem.max_states) {
            throw std::runtime_error("correlated state space too large; increase quantization");
        }
    }

    auto& terminal = r.tables[n - 1];
    for (const auto& h : reachable[n - 1]) {
        auto& v = terminal.values[h];
        v.resize(width);
        for (std::size_t a = 0; a < width; ++a) {
            v[a] = p_pl(terminal.lower + static_cast<Tick>(a));
        }
    }

    for (std::size_t i = n - 1; i-- > 0;) {
        const auto& model = models[i];
        const auto& next = r.tables[i + 1].values;
        auto& table = r.tables[i];
        for (const auto& h : reachable[i]) {
            auto& values = table.values[h];
            auto& policy = table.policy[h];
            values.assign(width, -1.0);
            policy.assign(width, 0);
            for (std::size_t k = 0; k < n_speeds; ++k) {
                const DiscretePmf& pmf = model.pmf(k, h);
                const auto pm = pmf.masses();
                // Next-stage value row for each traversal outcome.
                std::vector<const std::vector<double>*> rows(pm.size());
                for (std::size_t j = 0; j < pm.size(); ++j) {
                    rows[j] = &next.at(model.advance(h, pmf.offset() + static_cast<Tick>(j)));
                }
                const auto shift = static_cast<std::size_t>(pmf.offset() - t_mins[i]);
                for (std::size_t a = 0; a < width; ++a) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < pm.size(); ++j) {
                        const std::size_t b = a + shift + j;
                        if (b >= width) {
                            break;
                        }
                        acc += pm[j] * (*rows[j])[b];
                    }
                    if (acc > values[a]) {
                        values[a] = acc;
                        policy[a] = static_cast<std::int32_t>(k);
                    }
                }
            }
            for (double& v : values) {
                v = std::clamp(v, 0.0, 1.0);
            }
        }
    }

    double acc = 0.0;
    for (const auto& [h, p] : problem.initial_history) {
        acc += p * r.tables[0].value_at(problem.follower_start, h);
    }
    r.merge_probability = std::clamp(acc, 0.0, 1.0);
    return r;
}

HistoryDistribution stationary_history(const ConditionalTraversalModel& model,
                                       std::size_t speed_index) {
    HistoryDistribution dist;
    for (const auto& [h, row] : model.rows()) {
        dist[h] = 0.0;
    }
    if (dist.empty()) {
        throw std::invalid_argument("stationary history needs explicit table rows");
    }
    for (auto& [h, p] : dist) {
        p = 1.0 / static_cast<double>(dist.size());
    }
    // Lazy chain (I + P) / 2 shares P's stationary law and is aperiodic.
    for (int iter = 0; iter < 100000; ++iter) {
        HistoryDistribution next;
        for (const auto& [h, p] : dist) {
            next[h] += 0.5 * p;
            const DiscretePmf& pmf = model.pmf(speed_index, h);
            const auto pm = pmf.masses();
            for (std::size_t j = 0; j < pm.size(); ++j) {
                const History nh = model.advance(h, pmf.offset() + static_cast<Tick>(j));
                if (!model.has_row(nh)) {
                    throw std::invalid_argument("stationary history: chain leaves the table");
                }
                next[nh] += 0.5 * p * pm[j];
            }
        }
        double change = 0.0;
        for (const auto& [h, p] : next) {
            const auto it = dist.find(h);
            change += std::abs(p - (it == dist.end() ? 0.0 : it->second));
        }
        dist = std::move(next);
        if (change < 1e-14) {
            break;
        }
    }
    std::erase_if(dist, [](const auto& kv) { return kv.second <= 0.0; });
    double total = 0.0;
    for (const auto& [h, p] : dist) {
        total += p;
    }
    for (auto& [h, p] : dist) {
        p /= total;
    }
    return dist;
}

}  // namespace platoon
