#include <doctest.h>

#include <string>

#include "platoon/scenario_io.hpp"

using namespace platoon;
using nlohmann::json;

namespace {

const std::string kDir = PLATOON_SCENARIO_DIR;

json minimal() {
    return json::parse(R"({
      "tick_hours": 0.0001,
      "delta_t_hours": 0.01,
      "epsilon": 0.01,
      "speeds": [75, 80, 85],
      "leader": {"v_ref": 80, "segments": [{"length_km": 4, "mixture": "reliable"}]},
      "follower": {"start_hours": -0.01, "segments": [{"length_km": 4, "mixture": "reliable"}]}
    })");
}

std::string error_path(const json& doc) {
    try {
        parse_scenario(doc);
    } catch (const ScenarioError& e) {
        return e.path();
    }
    return "<no error>";
}

}  // namespace

TEST_CASE("shipped scenario files") {
    const auto one = parse_scenario_file(kDir + "/scenario1.json");
    const Scenario& s = one.scenario;
    CHECK(s.leader_route.size() == 3);
    CHECK(s.follower_route.size() == 3);
    CHECK(s.delta_t == 100);
    CHECK(s.epsilon == 0.01);
    CHECK(s.speeds.size() == 21);
    CHECK(s.follower_start == -250);
    CHECK(s.leader_start == 0);
    REQUIRE(one.baseline_speed);
    CHECK(*one.baseline_speed == 80.0);
    CHECK_FALSE(one.correlated);

    const auto two = parse_scenario_file(kDir + "/scenario2.json");
    CHECK(two.scenario.follower_route[1].mixture.w == SpeedMixture::unreliable().w);
    CHECK(two.scenario.follower_route[0].mixture.w == SpeedMixture::reliable().w);

    const auto toy = parse_scenario_file(kDir + "/correlated_toy.json");
    REQUIRE(toy.correlated);
    CHECK(toy.correlated->history_length == 1);
    CHECK(toy.correlated->follower_segments.size() == 2);
    REQUIRE(toy.correlated->initial_history);
    CHECK(toy.correlated->initial_history->at({1}) == 0.3);
    const auto problem = build_correlated_problem(toy);
    CHECK(problem.follower_segments.front().quantizer().has_value());
    const auto r = correlated_backward_solve(problem);
    CHECK(r.merge_probability > 0.0);
    CHECK(r.merge_probability <= 1.0);
}

TEST_CASE("defaults and notices") {
    json doc = minimal();
    doc.erase("epsilon");
    const auto p = parse_scenario(doc);
    CHECK(p.scenario.epsilon == 0.01);
    REQUIRE_FALSE(p.notices.empty());
    CHECK(p.notices.front().find("epsilon") != std::string::npos);
    CHECK(p.scenario.follower_start == -100);
    CHECK(p.scenario.leader_start == 0);
    CHECK(p.scenario.follower_route[0].label == "1");

    doc = minimal();
    doc["delta_t_hours"] = 0.01004;
    const auto rounded = parse_scenario(doc);
    CHECK(rounded.scenario.delta_t == 100);
    CHECK(rounded.notices.size() == 1);

    doc["delta_t_hours"] = 0.00005;  // exactly half a tick rounds up
    CHECK(parse_scenario(doc).scenario.delta_t == 1);
}

TEST_CASE("hours to ticks") {
    std::vector<std::string> notes;
    CHECK(hours_to_ticks(0.025, 1e-4, "x", notes) == 250);
    CHECK(hours_to_ticks(-0.025, 1e-4, "x", notes) == -250);
    CHECK(notes.empty());
    CHECK(hours_to_ticks(2.5, 1.0, "x", notes) == 3);
    CHECK(hours_to_ticks(-2.5, 1.0, "x", notes) == -2);
    CHECK(notes.size() == 2);
    CHECK_THROWS_AS(hours_to_ticks(1e300, 1.0, "x", notes), ScenarioError);
}

TEST_CASE("errors name the offending field") {
    json doc = minimal();
    doc.erase("tick_hours");
    CHECK(error_path(doc) == "$.tick_hours");

    doc = minimal();
    doc["follower"]["segments"][0]["length_km"] = "four";
    CHECK(error_path(doc) == "$.follower.segments[0].length_km");

    doc = minimal();
    doc["leader"]["segments"][0]["mixture"] = "bumpy";
    CHECK(error_path(doc) == "$.leader.segments[0].mixture");

    doc = minimal();
    doc["leader"]["segments"][0]["mixture"] = json{{"w", 2.0}, {"mu1", 60}, {"sigma1", 10}, {"sigma2", 5}};
    CHECK(error_path(doc) == "$.leader.segments[0].mixture");

    doc = minimal();
    doc["speeds"] = json::array({80, 75});
    CHECK(error_path(doc) == "$.speeds");

    doc = minimal();
    doc["epsilon"] = 1.5;
    CHECK(error_path(doc) == "$.epsilon");

    doc = minimal();
    doc["follower"].erase("start_hours");
    CHECK(error_path(doc) == "$.follower");

    doc = minimal();
    doc["speeds"] = json::array({75, 120});
    CHECK(error_path(doc) == "$");

    CHECK_THROWS_AS(parse_scenario_file(kDir + "/does_not_exist.json"), ScenarioError);
}

TEST_CASE("correlated section") {
    json doc = minimal();
    doc["correlated"] = json::parse(R"({
      "H": 1,
      "conditional_tables": [
        {"quantizer": {"thresholds": [500]},
         "rows": [
           {"history": [0], "pmfs": [{"offset": 480, "masses": [0.5, 0.5]},
                                     {"offset": 470, "masses": [0.5, 0.5]},
                                     {"offset": 460, "masses": [0.5, 0.5]}]},
           {"history": [1], "pmfs": [{"offset": 520, "masses": [0.5, 0.5]},
                                     {"offset": 510, "masses": [0.5, 0.5]},
                                     {"offset": 500, "masses": [0.5, 0.5]}]}
         ]}
      ]
    })");
    const auto p = parse_scenario(doc);
    REQUIRE(p.correlated);
    const auto& model = p.correlated->follower_segments.front();
    REQUIRE(model.quantizer());
    CHECK(model.quantizer()->name(1) == "regime 1");
    CHECK(model.rows().size() == 2);
    CHECK_FALSE(p.correlated->initial_history);

    // Without an initial history the stationary law of the first table is used.
    const auto problem = build_correlated_problem(p);
    double total = 0.0;
    for (const auto& [h, w] : problem.initial_history) {
        total += w;
    }
    CHECK(total == doctest::Approx(1.0));

    json bad = doc;
    bad["correlated"]["conditional_tables"][0]["rows"][1]["history"] = json::array({0, 1});
    CHECK(error_path(bad) == "$.correlated.conditional_tables[0].rows[1].history");

    bad = doc;
    bad["correlated"]["conditional_tables"][0]["rows"][0]["pmfs"].erase(2);
    CHECK(error_path(bad) == "$.correlated.conditional_tables[0].rows[0].pmfs");

    bad = doc;
    bad["correlated"]["conditional_tables"].push_back(json::object());
    CHECK(error_path(bad) == "$.correlated.conditional_tables");

    bad = doc;
    bad["correlated"]["conditional_tables"][0]["rows"][0]["pmfs"][0]["masses"] = json::array({0.5, 0.4});
    CHECK(error_path(bad) == "$.correlated.conditional_tables[0].rows[0].pmfs[0]");
}
