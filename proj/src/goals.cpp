#include "evac/goals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "evac/hazard.hpp"

namespace evac {

std::string_view to_string(GoalKind kind) {
    switch (kind) {
        case GoalKind::distance: return "distance";
        case GoalKind::time: return "time";
        case GoalKind::energy: return "energy";
        case GoalKind::safety: return "safety";
    }
    return "?";
}

GoalKind parse_goal_kind(std::string_view name) {
    for (auto kind : kAllGoals) {
        if (to_string(kind) == name) return kind;
    }
    throw std::invalid_argument("unknown goal `" + std::string(name) + "`");
}

namespace {

const BuildingGraph& graph_of(const GoalContext& ctx) {
    if (ctx.graph == nullptr) throw std::invalid_argument("goal context has no graph");
    return *ctx.graph;
}

double edge_length(const BuildingGraph& graph, NodeId a, NodeId b) {
    auto e = graph.find_edge(a, b);
    if (!e) throw BuildingError("path step " + std::to_string(a) + " -> " + std::to_string(b) + " is not an edge");
    return graph.edge(*e).length;
}

double effective_edge(const GoalContext& ctx, NodeId a, NodeId b) {
    const double length = edge_length(*ctx.graph, a, b);
    const bool burning = ctx.samples[a].burning || ctx.samples[b].burning;
    return burning ? length * ctx.fire_multiplier : length;
}

LoadLookup loads_of(const GoalContext& ctx) {
    return [&ctx](NodeId n) { return NodeLoad{ctx.samples[n].rho, ctx.samples[n].queue}; };
}

}  // namespace

double goal_distance(std::span<const NodeId> path, const GoalContext& ctx) {
    const auto& graph = graph_of(ctx);
    return effective_length(
        graph, path, [&](NodeId n) { return ctx.samples[n].burning; }, ctx.fire_multiplier);
}

double goal_time(std::span<const NodeId> path, const GoalContext& ctx, const TimeGoalParams& params) {
    graph_of(ctx);
    if (!(ctx.speed > 0.0)) throw std::invalid_argument("speed must be positive");
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const auto& source = ctx.samples[path[i]];
        total += effective_edge(ctx, path[i], path[i + 1]) / ctx.speed;
        total += params.coeffs.wait_per_expected * expected_queue_length(source.rho).value;
        total += std::max(0.0, params.coeffs.wait_per_queued * source.queue - total);
    }
    return total;
}

double goal_energy(std::span<const NodeId> path, const GoalContext& ctx, const EnergyGoalParams& params) {
    const auto& graph = graph_of(ctx);
    const auto forecast = predict_path_congestion(graph, path, ctx.speed, loads_of(ctx), params.coeffs);
    double total = params.per_brake * forecast.congestion;
    total += params.per_cm * path_length(graph, path);
    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        total += params.per_degree * turn_angle_deg(graph, path[i - 1], path[i], path[i + 1]);
    }
    return total;
}

double goal_safety(std::span<const NodeId> path, const GoalContext& ctx, const SafetyGoalParams& params) {
    const auto& graph = graph_of(ctx);
    const auto forecast = predict_path_congestion(graph, path, ctx.speed, loads_of(ctx), params.coeffs);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        total += effective_edge(ctx, path[i], path[i + 1]);
        if (ctx.hazard_arrival.empty()) continue;
        const double t_hr = ctx.hazard_arrival[path[i + 1]];
        const double lateness = forecast.node_etas[i + 1] + ctx.now - t_hr;
        if (std::isfinite(t_hr) && lateness >= 0.0) total += params.growth_rate * lateness;
    }
    return total;
}

double evaluate_goal(GoalKind kind, std::span<const NodeId> path, const GoalContext& ctx, const GoalParams& params) {
    switch (kind) {
        case GoalKind::distance: return goal_distance(path, ctx);
        case GoalKind::time: return goal_time(path, ctx, params.time);
        case GoalKind::energy: return goal_energy(path, ctx, params.energy);
        case GoalKind::safety: return goal_safety(path, ctx, params.safety);
    }
    throw std::invalid_argument("unknown goal kind");
}

double reward(double goal_value) {
    if (goal_value < 0.0 || std::isnan(goal_value)) throw std::invalid_argument("goal value must be non-negative");
    if (goal_value == 0.0) return kMaxReward;
    return 1.0 / goal_value;
}

double turn_angle_deg(const BuildingGraph& graph, NodeId a, NodeId b, NodeId c) {
    const auto& na = graph.node(a);
    const auto& nb = graph.node(b);
    const auto& nc = graph.node(c);
    if (na.floor != nb.floor || nb.floor != nc.floor) return 0.0;
    const double ux = nb.position.x - na.position.x;
    const double uy = nb.position.y - na.position.y;
    const double vx = nc.position.x - nb.position.x;
    const double vy = nc.position.y - nb.position.y;
    const double nu = std::hypot(ux, uy);
    const double nv = std::hypot(vx, vy);
    if (nu == 0.0 || nv == 0.0) return 0.0;
    const double cosine = std::clamp((ux * vx + uy * vy) / (nu * nv), -1.0, 1.0);
    return std::acos(cosine) * 180.0 / std::numbers::pi;
}

}  // namespace evac
