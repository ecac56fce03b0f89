#pragma once

#include <functional>
#include <span>
#include <vector>

#include "evac/building.hpp"

namespace evac {

struct HazardParams {
    double spread_rate = 80.0;       // cm/s along graph shortest distance
    double growth_rate = 0.2;        // intensity units per second after arrival
    double fire_multiplier = 0.0;    // effective-length penalty; 0 means "derive from graph"
    double initial_intensity = 0.0;  // intensity at the arrival instant
};

/// 10 x (max edge length) x (node count).
double default_fire_multiplier(const BuildingGraph& graph);

/// Fills in a derived fire multiplier and checks the parameters against the graph.
HazardParams resolve_hazard_params(const BuildingGraph& graph, HazardParams params);

/// Deterministic fire front. Intensity at a node is a pure function of time, so the
/// state is a value that can be advanced or copied freely.
struct HazardState {
    NodeId ignition_node = 0;
    double ignition_time = 0.0;
    double time = 0.0;                  // instant the intensities refer to
    std::vector<double> arrival_time;   // t_hr per node; kInfinity if never reached
    std::vector<double> intensity;      // per node at `time`

    bool burning(NodeId n, double t) const { return t >= arrival_time[n]; }
};

/// t_hr(n) = ignition_time + graph distance(n, ignition) / spread_rate.
std::vector<double> hazard_arrival_times(const BuildingGraph& graph, NodeId ignition, double ignition_time,
                                         const HazardParams& params);

HazardState ignite(const BuildingGraph& graph, NodeId ignition, double ignition_time, const HazardParams& params);

/// Intensity at `t` for a node reached at `arrival`.
double intensity_at(double arrival, double t, const HazardParams& params);

/// Integral of intensity over [t0, t1] for a node reached at `arrival`.
double exposure(double arrival, double t0, double t1, const HazardParams& params);

/// Recomputes intensities at `t`. Throws if `t` precedes the state's time.
HazardState advance_hazard(const HazardState& state, double t, const HazardParams& params);

/// Fire multiplier: M when either endpoint is burning at t (arrival inclusive), else 1.
double edge_fire_factor(const HazardState& state, const Edge& e, double t, const HazardParams& params);

using BurningPredicate = std::function<bool(NodeId)>;

/// Sum over edges of length x factor, with factor M on edges touching a burning node.
double effective_length(const BuildingGraph& graph, std::span<const NodeId> path, const BurningPredicate& burning,
                        double fire_multiplier);

double effective_length(const HazardState& state, const BuildingGraph& graph, std::span<const NodeId> path, double t,
                        const HazardParams& params);

}  // namespace evac
