#pragma once

#include <span>
#include <string_view>

#include "evac/building.hpp"
#include "evac/queueing.hpp"

namespace evac {

enum class GoalKind { distance, time, energy, safety };

constexpr GoalKind kAllGoals[] = {GoalKind::distance, GoalKind::time, GoalKind::energy, GoalKind::safety};

std::string_view to_string(GoalKind kind);
/// Throws std::invalid_argument for unknown names.
GoalKind parse_goal_kind(std::string_view name);

/// What is known about one node at evaluation time.
struct NodeSample {
    bool burning = false;
    double intensity = 0.0;
    double rho = 0.0;
    int queue = 0;
};

/// Snapshot a goal is evaluated against. `samples` is indexed by NodeId.
struct GoalContext {
    const BuildingGraph* graph = nullptr;
    std::span<const NodeSample> samples;
    double now = 0.0;                      // t_current, s
    double speed = 150.0;                  // evacuee speed, cm/s
    double fire_multiplier = 1.0;          // M
    std::span<const double> hazard_arrival;  // absolute t_hr per node; empty when no fire is known
};

struct TimeGoalParams {
    CongestionCoefficients coeffs;
};

struct EnergyGoalParams {
    double per_brake = 50.0;   // c1
    double per_cm = 1.0;       // c2
    double per_degree = 2.0;   // c3
    CongestionCoefficients coeffs;
};

struct SafetyGoalParams {
    double growth_rate = 0.2;  // hazard intensity growth per second
    CongestionCoefficients coeffs;
};

struct GoalParams {
    TimeGoalParams time;
    EnergyGoalParams energy;
    SafetyGoalParams safety;
};

/// Effective length of the path.
double goal_distance(std::span<const NodeId> path, const GoalContext& ctx);

/// Sum over edges of effective length / speed, the predicted wait a rho/(1-rho) at the
/// edge's source, and max(0, b * queue(source) - eta), where eta is the running
/// arrival time at the edge's far node before that queue term.
double goal_time(std::span<const NodeId> path, const GoalContext& ctx, const TimeGoalParams& params);

/// c1 * expected congestion + c2 * physical length + c3 * total turning in degrees.
double goal_energy(std::span<const NodeId> path, const GoalContext& ctx, const EnergyGoalParams& params);

/// Sum over edges of the effective length plus b * (eta + now - t_hr) at the far node
/// whenever the evacuee would arrive at or after the hazard.
double goal_safety(std::span<const NodeId> path, const GoalContext& ctx, const SafetyGoalParams& params);

double evaluate_goal(GoalKind kind, std::span<const NodeId> path, const GoalContext& ctx, const GoalParams& params);

constexpr double kMaxReward = 1e9;

/// R = 1 / G, capped at kMaxReward for G = 0.
double reward(double goal_value);

/// Turn between edges a->b and b->c in degrees, measured in the floor plane; 0 when
/// either edge changes floor.
double turn_angle_deg(const BuildingGraph& graph, NodeId a, NodeId b, NodeId c);

}  // namespace evac
