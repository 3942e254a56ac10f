#include "platoon/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace platoon {

using nlohmann::json;

namespace {

const json& require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) {
        throw ScenarioError(path, "expected an object");
    }
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw ScenarioError(path + "." + key, "missing required field");
    }
    return *it;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) {
        throw ScenarioError(path, "expected a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        throw ScenarioError(path, "expected a finite number");
    }
    return x;
}

double number_field(const json& obj, const std::string& key, const std::string& path) {
    return number(require(obj, key, path), path + "." + key);
}

std::int64_t integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) {
        throw ScenarioError(path, "expected an integer");
    }
    return v.get<std::int64_t>();
}

const json& array(const json& v, const std::string& path) {
    if (!v.is_array()) {
        throw ScenarioError(path, "expected an array");
    }
    return v;
}

template <typename F>
auto wrap(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ScenarioError&) {
        throw;
    } catch (const std::exception& e) {
        throw ScenarioError(path, e.what());
    }
}

SpeedMixture parse_mixture(const json& v, const std::string& path) {
    if (v.is_string()) {
        const auto name = v.get<std::string>();
        if (name == "reliable") {
            return SpeedMixture::reliable();
        }
        if (name == "unreliable") {
            return SpeedMixture::unreliable();
        }
        throw ScenarioError(path, "unknown mixture preset '" + name + "'");
    }
    SpeedMixture m;
    m.w = number_field(v, "w", path);
    m.mu1 = number_field(v, "mu1", path);
    m.sigma1 = number_field(v, "sigma1", path);
    m.sigma2 = number_field(v, "sigma2", path);
    m.v_min = v.contains("v_min") ? number_field(v, "v_min", path) : 10.0;
    m.v_max = v.contains("v_max") ? number_field(v, "v_max", path) : 100.0;
    wrap(path, [&] { m.validate(); });
    return m;
}

std::vector<SegmentSpec> parse_route(const json& route, const std::string& path) {
    const auto& segs = array(require(route, "segments", path), path + ".segments");
    if (segs.empty()) {
        throw ScenarioError(path + ".segments", "route needs at least one segment");
    }
    std::vector<SegmentSpec> out;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const std::string p = path + ".segments[" + std::to_string(i) + "]";
        SegmentSpec s;
        s.length_km = number_field(segs[i], "length_km", p);
        s.mixture = parse_mixture(require(segs[i], "mixture", p), p + ".mixture");
        s.label = segs[i].value("label", std::to_string(i + 1));
        wrap(p, [&] { s.validate(); });
        out.push_back(std::move(s));
    }
    return out;
}

SpeedSet parse_speeds(const json& v, const std::string& path) {
    return wrap(path, [&] {
        if (v.is_array()) {
            std::vector<double> speeds;
            for (std::size_t i = 0; i < v.size(); ++i) {
                speeds.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
            }
            return SpeedSet(std::move(speeds));
        }
        return SpeedSet::range(number_field(v, "min", path), number_field(v, "max", path),
                               number_field(v, "step", path));
    });
}

DiscretePmf parse_pmf(const json& v, const std::string& path) {
    const Tick offset = integer(require(v, "offset", path), path + ".offset");
    const auto& m = array(require(v, "masses", path), path + ".masses");
    std::vector<double> masses;
    for (std::size_t k = 0; k < m.size(); ++k) {
        masses.push_back(number(m[k], path + ".masses[" + std::to_string(k) + "]"));
    }
    return wrap(path, [&] { return DiscretePmf::from_masses(offset, std::move(masses)); });
}

std::vector<DiscretePmf> parse_row(const json& v, std::size_t n_speeds, const std::string& path) {
    const auto& arr = array(v, path);
    if (arr.size() != n_speeds) {
        throw ScenarioError(path, "expected one pmf per admissible speed (" +
                                      std::to_string(n_speeds) + ")");
    }
    std::vector<DiscretePmf> row;
    for (std::size_t k = 0; k < arr.size(); ++k) {
        row.push_back(parse_pmf(arr[k], path + "[" + std::to_string(k) + "]"));
    }
    return row;
}

History parse_history(const json& v, std::size_t h, const std::string& path) {
    const auto& arr = array(v, path);
    if (arr.size() != h) {
        throw ScenarioError(path, "history must have H = " + std::to_string(h) + " entries");
    }
    History out;
    for (std::size_t k = 0; k < arr.size(); ++k) {
        out.push_back(integer(arr[k], path + "[" + std::to_string(k) + "]"));
    }
    return out;
}

RegimeQuantizer parse_quantizer(const json& v, const std::string& path) {
    const auto& th = array(require(v, "thresholds", path), path + ".thresholds");
    std::vector<Tick> thresholds;
    for (std::size_t k = 0; k < th.size(); ++k) {
        thresholds.push_back(integer(th[k], path + ".thresholds[" + std::to_string(k) + "]"));
    }
    std::vector<std::string> labels;
    if (v.contains("labels")) {
        for (const auto& l : array(v["labels"], path + ".labels")) {
            labels.push_back(l.get<std::string>());
        }
    } else if (thresholds.size() == 2) {
        labels = {"free flow", "synchronized", "congested"};
    } else {
        for (std::size_t k = 0; k <= thresholds.size(); ++k) {
            labels.push_back("regime " + std::to_string(k));
        }
    }
    return wrap(path, [&] { return RegimeQuantizer(std::move(thresholds), std::move(labels)); });
}

CorrelatedSpec parse_correlated(const json& v, const Scenario& scenario, const std::string& path) {
    CorrelatedSpec spec;
    const std::int64_t h = integer(require(v, "H", path), path + ".H");
    if (h < 1) {
        throw ScenarioError(path + ".H", "history length must be at least 1");
    }
    spec.history_length = static_cast<std::size_t>(h);
    if (v.contains("max_states")) {
        const std::int64_t n = integer(v["max_states"], path + ".max_states");
        if (n < 1) {
            throw ScenarioError(path + ".max_states", "must be positive");
        }
        spec.max_states = static_cast<std::size_t>(n);
    }
    auto cap = [&](const char* key, std::size_t& field) {
        if (v.contains(key)) {
            const std::int64_t x = integer(v[key], path + "." + key);
            if (x < 1) {
                throw ScenarioError(path + "." + key, "must be positive");
            }
            field = static_cast<std::size_t>(x);
        }
    };
    cap("max_H", spec.max_history_length);
    cap("max_regimes", spec.max_regimes);
    if (spec.history_length > spec.max_history_length) {
        throw ScenarioError(path + ".H", "exceeds max_H = " + std::to_string(spec.max_history_length));
    }
    std::optional<RegimeQuantizer> shared;
    if (v.contains("quantizer")) {
        shared = parse_quantizer(v["quantizer"], path + ".quantizer");
    }

    const std::string tp = path + ".conditional_tables";
    const auto& tables = array(require(v, "conditional_tables", path), tp);
    if (tables.size() != scenario.follower_route.size()) {
        throw ScenarioError(tp, "need one table per follower segment (" +
                                    std::to_string(scenario.follower_route.size()) + ")");
    }
    const std::size_t n_speeds = scenario.speeds.size();
    for (std::size_t i = 0; i < tables.size(); ++i) {
        const std::string p = tp + "[" + std::to_string(i) + "]";
        const json& t = tables[i];
        auto q = shared;
        if (t.contains("quantizer")) {
            q = parse_quantizer(t["quantizer"], p + ".quantizer");
        }
        if (q && q->size() > spec.max_regimes) {
            throw ScenarioError(p, "quantizer has more than max_regimes = " +
                                       std::to_string(spec.max_regimes) + " labels");
        }
        ConditionalTraversalModel model(spec.history_length, scenario.speeds.values(), q);
        if (t.contains("default")) {
            model.set_default(parse_row(t["default"], n_speeds, p + ".default"));
        }
        if (t.contains("rows")) {
            const auto& rows = array(t["rows"], p + ".rows");
            for (std::size_t r = 0; r < rows.size(); ++r) {
                const std::string rp = p + ".rows[" + std::to_string(r) + "]";
                model.add(parse_history(require(rows[r], "history", rp), spec.history_length,
                                        rp + ".history"),
                          parse_row(require(rows[r], "pmfs", rp), n_speeds, rp + ".pmfs"));
            }
        }
        if (model.rows().empty() && !t.contains("default")) {
            throw ScenarioError(p, "table needs 'rows' or 'default'");
        }
        spec.follower_segments.push_back(std::move(model));
    }

    if (v.contains("initial_history")) {
        const std::string ip = path + ".initial_history";
        HistoryDistribution dist;
        const auto& arr = array(v["initial_history"], ip);
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string p = ip + "[" + std::to_string(k) + "]";
            dist[parse_history(require(arr[k], "history", p), spec.history_length,
                               p + ".history")] += number_field(arr[k], "probability", p);
        }
        spec.initial_history = std::move(dist);
    }
    return spec;
}

double route_length(const std::vector<SegmentSpec>& route) {
    double total = 0.0;
    for (const auto& s : route) {
        total += s.length_km;
    }
    return total;
}

}  // namespace

Tick hours_to_ticks(double hours, double tick_hours, const std::string& path,
                    std::vector<std::string>& notices) {
    const double x = hours / tick_hours;
    if (!std::isfinite(x) || std::abs(x) > 9.0e15) {
        throw ScenarioError(path, "value does not fit the tick range");
    }
    const double rounded = std::floor(x + 0.5);
    if (std::abs(x - rounded) > 0.5) {
        throw ScenarioError(path, "cannot be represented within half a tick");
    }
    if (std::abs(x - rounded) > 1e-9 * std::max(1.0, std::abs(x))) {
        std::ostringstream msg;
        msg.precision(17);
        msg << path << ": " << hours << " h rounded to " << static_cast<Tick>(rounded)
            << " ticks";
        notices.push_back(msg.str());
    }
    return static_cast<Tick>(rounded);
}

ParsedScenario parse_scenario(const json& doc) {
    ParsedScenario out;
    Scenario& s = out.scenario;
    const std::string root = "$";
    if (!doc.is_object()) {
        throw ScenarioError(root, "scenario must be a JSON object");
    }

    s.tick_hours = number_field(doc, "tick_hours", root);
    if (!(s.tick_hours > 0.0)) {
        throw ScenarioError("$.tick_hours", "must be positive");
    }
    s.delta_t = hours_to_ticks(number_field(doc, "delta_t_hours", root), s.tick_hours,
                               "$.delta_t_hours", out.notices);
    if (s.delta_t < 0) {
        throw ScenarioError("$.delta_t_hours", "must be non-negative");
    }
    if (doc.contains("epsilon")) {
        s.epsilon = number_field(doc, "epsilon", root);
    } else {
        s.epsilon = 0.01;
        out.notices.push_back("$.epsilon: not given, defaulting to 0.01");
    }
    if (!(s.epsilon >= 0.0 && s.epsilon < 1.0)) {
        throw ScenarioError("$.epsilon", "must lie in [0, 1)");
    }
    s.speeds = parse_speeds(require(doc, "speeds", root), "$.speeds");

    const json& leader = require(doc, "leader", root);
    s.leader_route = parse_route(leader, "$.leader");
    s.leader_speed = number_field(leader, "v_ref", "$.leader");
    if (!(s.leader_speed > 0.0)) {
        throw ScenarioError("$.leader.v_ref", "must be positive");
    }
    s.leader_start = leader.contains("start_hours")
                         ? hours_to_ticks(number_field(leader, "start_hours", "$.leader"),
                                          s.tick_hours, "$.leader.start_hours", out.notices)
                         : 0;

    const json& follower = require(doc, "follower", root);
    s.follower_route = parse_route(follower, "$.follower");
    if (follower.contains("start_hours")) {
        s.follower_start = hours_to_ticks(number_field(follower, "start_hours", "$.follower"),
                                          s.tick_hours, "$.follower.start_hours", out.notices);
    } else if (follower.contains("meet_at_speed_kmh")) {
        // Start so that both vehicles reach the merge point together at this speed.
        const double v = number_field(follower, "meet_at_speed_kmh", "$.follower");
        if (!(v > 0.0)) {
            throw ScenarioError("$.follower.meet_at_speed_kmh", "must be positive");
        }
        const double leader_start_h = static_cast<double>(s.leader_start) * s.tick_hours;
        const double start_h =
            leader_start_h + (route_length(s.leader_route) - route_length(s.follower_route)) / v;
        s.follower_start =
            hours_to_ticks(start_h, s.tick_hours, "$.follower.meet_at_speed_kmh", out.notices);
        out.notices.push_back("$.follower: start derived as " + std::to_string(s.follower_start) +
                              " ticks");
    } else {
        throw ScenarioError("$.follower", "need 'start_hours' or 'meet_at_speed_kmh'");
    }

    if (doc.contains("baseline_speed")) {
        out.baseline_speed = number_field(doc, "baseline_speed", root);
    } else {
        const auto& vals = s.speeds.values();
        if (std::find(vals.begin(), vals.end(), s.leader_speed) != vals.end()) {
            out.baseline_speed = s.leader_speed;
        }
    }

    wrap(root, [&] { s.validate(); });

    if (doc.contains("correlated")) {
        out.correlated = parse_correlated(doc["correlated"], s, "$.correlated");
    }
    return out;
}

ParsedScenario parse_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError(path.string(), "cannot open scenario file");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ScenarioError(path.string(), std::string("invalid JSON: ") + e.what());
    }
    return parse_scenario(doc);
}

CorrelatedProblem build_correlated_problem(const ParsedScenario& parsed) {
    if (!parsed.correlated) {
        throw ScenarioError("$.correlated", "scenario has no correlated section");
    }
    const auto& spec = *parsed.correlated;
    const auto& s = parsed.scenario;
    CorrelatedProblem p;
    p.leader_arrival = leader_forward(s);
    p.delta_t = s.delta_t;
    p.epsilon = s.epsilon;
    p.follower_segments = spec.follower_segments;
    p.follower_start = s.follower_start;
    p.max_states = spec.max_states;
    p.max_history_length = spec.max_history_length;
    p.max_regimes = spec.max_regimes;
    if (spec.initial_history) {
        p.initial_history = *spec.initial_history;
    } else {
        p.initial_history = wrap("$.correlated.initial_history", [&] {
            return stationary_history(spec.follower_segments.front(), s.speeds.size() / 2);
        });
    }
    return p;
}

}  // namespace platoon
