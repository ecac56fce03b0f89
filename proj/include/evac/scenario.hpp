#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "evac/building.hpp"
#include "evac/cpn.hpp"
#include "evac/goals.hpp"
#include "evac/hazard.hpp"

namespace evac {

enum class Policy { autonomous, dijkstra, cpn };
enum class Category { normal, wheelchair, sick, child };

constexpr std::array<Category, 4> kAllCategories = {Category::normal, Category::wheelchair, Category::sick,
                                                    Category::child};

std::string_view to_string(Policy policy);
std::string_view to_string(Category category);
Policy parse_policy(std::string_view name);
Category parse_category(std::string_view name);

struct CategoryParams {
    double share = 0.25;              // fraction of evacuees drawn into this category
    double speed = 150.0;             // cm/s
    GoalKind goal = GoalKind::time;   // routing goal under CPN
    double damage_multiplier = 1.0;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Values swept by `evacsim sweep`; an empty axis means "use the base value".
struct SweepAxes {
    std::vector<Policy> policies;
    std::vector<int> evacuee_counts;
    std::vector<int> movement_depths;
    std::vector<std::optional<GoalKind>> goals;  // nullopt = per-category goals
};

struct ScenarioConfig {
    std::string building_path;
    std::shared_ptr<const BuildingGraph> building;

    int evacuees = 60;
    std::array<CategoryParams, 4> categories = default_categories();
    std::optional<GoalKind> goal_override;  // every category routes on this goal when set
    std::vector<NodeId> initial_nodes;      // explicit start nodes; random placement when empty

    Policy policy = Policy::cpn;
    int movement_depth = 3;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    NodeId ignition_node = 0;
    double ignition_time = 0.0;  // s; the alarm sounds and evacuation starts here
    HazardParams hazard;
    double block_intensity = 8.0;  // nodes at or above this intensity cannot be entered

    CpnParams cpn;
    GoalParams goal_params;

    double service_time = 1.0;        // s to traverse a node (1 / mu)
    double queue_smoothing = 0.4;     // rolling-average constant for arrival rates
    double arrival_resolution = 0.1;  // s; coincident arrivals are spaced this far apart for rate estimates
    double damage_rate = 5.0;         // health per (intensity x s)
    double hazard_tick = 1.0;         // s
    double time_cap = 1800.0;         // s after the alarm

    SweepAxes sweep;

    static std::array<CategoryParams, 4> default_categories();

    GoalKind goal_for(Category c) const {
        return goal_override ? *goal_override : categories[static_cast<std::size_t>(c)].goal;
    }
    const CategoryParams& params(Category c) const { return categories[static_cast<std::size_t>(c)]; }
};

/// Parses `key = value` lines. Relative building paths resolve against `base_dir`.
/// The building is loaded and every value validated; failures raise ConfigError.
ScenarioConfig parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario_file(const std::filesystem::path& path);

/// Re-checks a (possibly programmatically edited) config; throws ConfigError.
void validate_scenario(ScenarioConfig& config);

/// "1..10" or "1,2,5".
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

}  // namespace evac
