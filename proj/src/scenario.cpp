#include "evac/scenario.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "evac/text.hpp"

namespace evac {

std::string_view to_string(Policy policy) {
    switch (policy) {
        case Policy::autonomous: return "autonomous";
        case Policy::dijkstra: return "dijkstra";
        case Policy::cpn: return "cpn";
    }
    return "?";
}

std::string_view to_string(Category category) {
    switch (category) {
        case Category::normal: return "normal";
        case Category::wheelchair: return "wheelchair";
        case Category::sick: return "sick";
        case Category::child: return "child";
    }
    return "?";
}

Policy parse_policy(std::string_view name) {
    for (auto p : {Policy::autonomous, Policy::dijkstra, Policy::cpn}) {
        if (to_string(p) == name) return p;
    }
    throw ConfigError("unknown policy `" + std::string(name) + "`");
}

Category parse_category(std::string_view name) {
    for (auto c : kAllCategories) {
        if (to_string(c) == name) return c;
    }
    throw ConfigError("unknown evacuee category `" + std::string(name) + "`");
}

std::array<CategoryParams, 4> ScenarioConfig::default_categories() {
    return {{
        {0.55, 150.0, GoalKind::time, 1.0},
        {0.15, 90.0, GoalKind::energy, 1.0},
        {0.15, 100.0, GoalKind::safety, 1.5},
        {0.15, 120.0, GoalKind::safety, 1.5},
    }};
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
    std::vector<std::uint64_t> seeds;
    const auto trimmed = trim(text);
    if (auto dots = trimmed.find(".."); dots != std::string_view::npos) {
        const auto lo = parse_number<std::uint64_t>(trim(trimmed.substr(0, dots)));
        const auto hi = parse_number<std::uint64_t>(trim(trimmed.substr(dots + 2)));
        if (hi < lo) throw std::invalid_argument("empty seed range");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
        return seeds;
    }
    for (const auto& part : split(trimmed, ',')) seeds.push_back(parse_number<std::uint64_t>(part));
    return seeds;
}

namespace {

template <typename T>
std::vector<T> parse_list(std::string_view value) {
    std::vector<T> out;
    for (const auto& part : split(value, ',')) out.push_back(parse_number<T>(part));
    return out;
}

struct Setter {
    ScenarioConfig& c;
    std::filesystem::path base_dir;

    void apply(const std::string& key, const std::string& value) {
        auto num = [&] { return parse_number<double>(value); };
        auto integer = [&] { return parse_number<int>(value); };

        static const std::string kSpeed = "speed.", kGoal = "goal.", kDamage = "damage_multiplier.",
                                 kHop = "hop_limit.";
        if (key == "building") {
            c.building_path = (base_dir / value).lexically_normal().string();
        } else if (key == "evacuees") {
            c.evacuees = integer();
        } else if (key == "category_mix") {
            for (auto& cat : c.categories) cat.share = 0.0;
            for (const auto& part : split(value, ',')) {
                auto pieces = split(part, ':');
                if (pieces.size() != 2) throw std::invalid_argument("expected category:share");
                c.categories[static_cast<std::size_t>(parse_category(pieces[0]))].share =
                    parse_number<double>(pieces[1]);
            }
        } else if (key.starts_with(kSpeed)) {
            c.categories[static_cast<std::size_t>(parse_category(key.substr(kSpeed.size())))].speed = num();
        } else if (key.starts_with(kGoal)) {
            c.categories[static_cast<std::size_t>(parse_category(key.substr(kGoal.size())))].goal =
                parse_goal_kind(value);
        } else if (key.starts_with(kDamage)) {
            c.categories[static_cast<std::size_t>(parse_category(key.substr(kDamage.size())))].damage_multiplier =
                num();
        } else if (key == "goal") {
            if (value == "default") {
                c.goal_override.reset();
            } else {
                c.goal_override = parse_goal_kind(value);
            }
        } else if (key == "initial_nodes") {
            c.initial_nodes = parse_list<NodeId>(value);
        } else if (key == "policy") {
            c.policy = parse_policy(value);
        } else if (key == "movement_depth") {
            c.movement_depth = integer();
        } else if (key == "seeds") {
            c.seeds = parse_seed_list(value);
        } else if (key == "ignition_node") {
            c.ignition_node = parse_number<NodeId>(value);
        } else if (key == "ignition_time_s") {
            c.ignition_time = num();
        } else if (key == "spread_rate_cm_s") {
            c.hazard.spread_rate = num();
        } else if (key == "growth_rate_per_s") {
            c.hazard.growth_rate = num();
        } else if (key == "fire_multiplier") {
            c.hazard.fire_multiplier = num();
        } else if (key == "initial_intensity") {
            c.hazard.initial_intensity = num();
        } else if (key == "block_intensity") {
            c.block_intensity = num();
        } else if (key == "drift_prefire") {
            c.cpn.drift_prefire = num();
        } else if (key == "drift_fire") {
            c.cpn.drift_fire = num();
        } else if (key == "sp_warmup") {
            c.cpn.sp_warmup = integer();
        } else if (key == "sp_period_s") {
            c.cpn.sp_period = num();
        } else if (key == "table_size") {
            c.cpn.table_size = parse_number<std::size_t>(value);
        } else if (key == "route_timeout_s") {
            c.cpn.route_timeout = num();
        } else if (key.starts_with(kHop)) {
            c.cpn.hop_limit_by_floor[parse_number<int>(key.substr(kHop.size()))] = integer();
        } else if (key == "threshold_smoothing") {
            c.cpn.threshold_smoothing = num();
        } else if (key == "ack_hop_latency_s") {
            c.cpn.ack_hop_latency = num();
        } else if (key == "c1") {
            c.goal_params.energy.per_brake = num();
        } else if (key == "c2") {
            c.goal_params.energy.per_cm = num();
        } else if (key == "c3") {
            c.goal_params.energy.per_degree = num();
        } else if (key == "coeff_a") {
            const double v = num();
            c.goal_params.time.coeffs.wait_per_expected = v;
            c.goal_params.energy.coeffs.wait_per_expected = v;
            c.goal_params.safety.coeffs.wait_per_expected = v;
        } else if (key == "coeff_b") {
            const double v = num();
            c.goal_params.time.coeffs.wait_per_queued = v;
            c.goal_params.energy.coeffs.wait_per_queued = v;
            c.goal_params.safety.coeffs.wait_per_queued = v;
        } else if (key == "service_time_s") {
            c.service_time = num();
        } else if (key == "queue_smoothing") {
            c.queue_smoothing = num();
        } else if (key == "arrival_resolution_s") {
            c.arrival_resolution = num();
        } else if (key == "damage_rate") {
            c.damage_rate = num();
        } else if (key == "hazard_tick_s") {
            c.hazard_tick = num();
        } else if (key == "time_cap_s") {
            c.time_cap = num();
        } else if (key == "sweep.policy") {
            c.sweep.policies.clear();
            for (const auto& p : split(value, ',')) c.sweep.policies.push_back(parse_policy(p));
        } else if (key == "sweep.evacuees") {
            c.sweep.evacuee_counts = parse_list<int>(value);
        } else if (key == "sweep.movement_depth") {
            c.sweep.movement_depths = parse_list<int>(value);
        } else if (key == "sweep.goal") {
            c.sweep.goals.clear();
            for (const auto& g : split(value, ',')) {
                c.sweep.goals.push_back(g == "default" ? std::nullopt : std::optional(parse_goal_kind(g)));
            }
        } else {
            throw ConfigError("unknown key `" + key + "`");
        }
    }
};

}  // namespace

void validate_scenario(ScenarioConfig& c) {
    if (!c.building) {
        if (c.building_path.empty()) throw ConfigError("no building given");
        try {
            c.building = std::make_shared<const BuildingGraph>(load_building_file(c.building_path));
        } catch (const BuildingError& e) {
            throw ConfigError(std::string("building: ") + e.what());
        }
    }
    const auto& g = *c.building;
    try {
        c.hazard = resolve_hazard_params(g, c.hazard);
        validate_cpn_params(c.cpn, g);
        ThresholdState check(c.cpn.threshold_smoothing);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (c.evacuees < 0) throw ConfigError("evacuees must be >= 0");
    if (c.movement_depth < 1) throw ConfigError("movement_depth must be >= 1");
    if (c.seeds.empty()) throw ConfigError("no seeds given");
    if (c.ignition_node >= g.node_count()) throw ConfigError("ignition_node out of range");
    if (!(c.block_intensity > 0.0)) throw ConfigError("block_intensity must be positive");
    if (!(c.service_time > 0.0)) throw ConfigError("service_time_s must be positive");
    if (!(c.queue_smoothing > 0.0 && c.queue_smoothing < 1.0)) throw ConfigError("queue_smoothing must be in (0, 1)");
    if (!(c.arrival_resolution > 0.0)) throw ConfigError("arrival_resolution_s must be positive");
    if (c.damage_rate < 0.0) throw ConfigError("damage_rate must be >= 0");
    if (!(c.hazard_tick > 0.0)) throw ConfigError("hazard_tick_s must be positive");
    if (!(c.time_cap > 0.0)) throw ConfigError("time_cap_s must be positive");
    double share = 0.0;
    for (const auto& cat : c.categories) {
        if (!(cat.speed > 0.0)) throw ConfigError("category speeds must be positive");
        if (cat.share < 0.0) throw ConfigError("category shares must be >= 0");
        if (cat.damage_multiplier < 0.0) throw ConfigError("damage multipliers must be >= 0");
        share += cat.share;
    }
    if (!(share > 0.0)) throw ConfigError("category_mix sums to zero");
    for (auto n : c.initial_nodes) {
        if (n >= g.node_count()) throw ConfigError("initial node " + std::to_string(n) + " out of range");
    }
    if (!c.initial_nodes.empty() && static_cast<int>(c.initial_nodes.size()) != c.evacuees) {
        throw ConfigError("initial_nodes must list one node per evacuee");
    }
}

ScenarioConfig parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
    ScenarioConfig config;
    Setter setter{config, base_dir};
    std::size_t line_no = 0;
    for (const auto& raw : split_lines(text)) {
        ++line_no;
        const auto line = trim(strip_comment(raw));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected `key = value`");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        try {
            setter.apply(key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const std::invalid_argument& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + key + ": " + e.what());
        }
    }
    validate_scenario(config);
    return config;
}

ScenarioConfig load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str(), path.parent_path());
}

}  // namespace evac
