#include <gtest/gtest.h>

#include "evac/scenario.hpp"

using namespace evac;

namespace {

std::string config(const std::string& extra) {
    return "building = default_building.txt\n" + extra;
}

std::string error_of(const std::string& text) {
    try {
        parse_scenario(text, EVAC_DATA_DIR);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(ParseScenario, ShippedConfigLoads) {
    const auto c = load_scenario_file(EVAC_DATA_DIR "/scenario.conf");
    ASSERT_TRUE(c.building);
    EXPECT_EQ(c.building->node_count(), 120u);
    EXPECT_EQ(c.evacuees, 120);
    EXPECT_EQ(c.policy, Policy::cpn);
    EXPECT_EQ(c.movement_depth, 3);
    EXPECT_EQ(c.seeds.size(), 10u);
    EXPECT_DOUBLE_EQ(c.params(Category::normal).share, 0.55);
    EXPECT_GT(c.hazard.fire_multiplier, 0.0);  // resolved default
}

TEST(ParseScenario, KeysApply) {
    const auto c = parse_scenario(config("evacuees = 7\npolicy = dijkstra\ngoal = energy\nspeed.child = 80\n"
                                         "goal.sick = distance\nc3 = 4\ncoeff_a = 0.5\ndrift_fire = 0.3\n"
                                         "hop_limit.2 = 90\nsweep.goal = default, time\n"),
                                  EVAC_DATA_DIR);
    EXPECT_EQ(c.evacuees, 7);
    EXPECT_EQ(c.policy, Policy::dijkstra);
    EXPECT_EQ(c.goal_for(Category::normal), GoalKind::energy);
    EXPECT_DOUBLE_EQ(c.params(Category::child).speed, 80.0);
    EXPECT_EQ(c.params(Category::sick).goal, GoalKind::distance);
    EXPECT_DOUBLE_EQ(c.goal_params.energy.per_degree, 4.0);
    EXPECT_DOUBLE_EQ(c.goal_params.time.coeffs.wait_per_expected, 0.5);
    EXPECT_DOUBLE_EQ(c.goal_params.safety.coeffs.wait_per_expected, 0.5);
    EXPECT_DOUBLE_EQ(c.cpn.drift_fire, 0.3);
    EXPECT_EQ(c.cpn.hop_limit_by_floor.at(2), 90);
    ASSERT_EQ(c.sweep.goals.size(), 2u);
    EXPECT_FALSE(c.sweep.goals[0].has_value());
    EXPECT_EQ(c.sweep.goals[1], GoalKind::time);
}

TEST(ParseScenario, ErrorsNameTheLine) {
    EXPECT_NE(error_of(config("\n# note\nwidth = 3\n")).find("line 4"), std::string::npos);
    EXPECT_NE(error_of(config("evacuees = many\n")).find("line 2"), std::string::npos);
    EXPECT_NE(error_of(config("policy\n")).find("line 2"), std::string::npos);
    EXPECT_NE(error_of(config("policy = random\n")).find("unknown policy"), std::string::npos);
}

TEST(ParseScenario, ValidationFailures) {
    EXPECT_NE(error_of("evacuees = 3\n").find("no building"), std::string::npos);
    EXPECT_NE(error_of(config("movement_depth = 0\n")).find("movement_depth"), std::string::npos);
    EXPECT_NE(error_of(config("ignition_node = 500\n")).find("ignition_node"), std::string::npos);
    EXPECT_NE(error_of(config("queue_smoothing = 1\n")).find("queue_smoothing"), std::string::npos);
    EXPECT_NE(error_of(config("evacuees = 2\ninitial_nodes = 4\n")).find("initial_nodes"), std::string::npos);
    EXPECT_NE(error_of(config("category_mix = normal:0\n")).find("sums to zero"), std::string::npos);
    EXPECT_FALSE(error_of("building = missing.txt\n").empty());
}

TEST(SeedList, RangesAndLists) {
    EXPECT_EQ(parse_seed_list("1..4"), (std::vector<std::uint64_t>{1, 2, 3, 4}));
    EXPECT_EQ(parse_seed_list(" 9 "), (std::vector<std::uint64_t>{9}));
    EXPECT_EQ(parse_seed_list("1, 2,5"), (std::vector<std::uint64_t>{1, 2, 5}));
    EXPECT_THROW(parse_seed_list("5..2"), std::invalid_argument);
    EXPECT_THROW(parse_seed_list("x"), std::invalid_argument);
}

TEST(ScenarioNames, RoundTrip) {
    for (auto p : {Policy::autonomous, Policy::dijkstra, Policy::cpn}) EXPECT_EQ(parse_policy(to_string(p)), p);
    for (auto c : kAllCategories) EXPECT_EQ(parse_category(to_string(c)), c);
    EXPECT_THROW(parse_category("adult"), ConfigError);
}
