#include "evac/hazard.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace evac {

double default_fire_multiplier(const BuildingGraph& graph) {
    return 10.0 * graph.max_edge_length() * static_cast<double>(graph.node_count());
}

HazardParams resolve_hazard_params(const BuildingGraph& graph, HazardParams params) {
    if (!(params.spread_rate > 0.0)) throw std::invalid_argument("hazard spread rate must be > 0");
    if (params.growth_rate < 0.0) throw std::invalid_argument("hazard growth rate must be >= 0");
    if (params.initial_intensity < 0.0) throw std::invalid_argument("initial fire intensity must be >= 0");
    if (params.fire_multiplier == 0.0) params.fire_multiplier = default_fire_multiplier(graph);
    if (!(params.fire_multiplier > graph.average_edge_length())) {
        throw std::invalid_argument("fire multiplier must exceed the average edge length (" +
                                    std::to_string(graph.average_edge_length()) + ")");
    }
    return params;
}

std::vector<double> hazard_arrival_times(const BuildingGraph& graph, NodeId ignition, double ignition_time,
                                         const HazardParams& params) {
    if (ignition >= graph.node_count()) throw std::out_of_range("ignition node out of range");
    auto dist = shortest_distances(graph, ignition, length_weight());
    for (auto& d : dist) d = std::isfinite(d) ? ignition_time + d / params.spread_rate : kInfinity;
    return dist;
}

HazardState ignite(const BuildingGraph& graph, NodeId ignition, double ignition_time, const HazardParams& params) {
    HazardState state;
    state.ignition_node = ignition;
    state.ignition_time = ignition_time;
    state.time = ignition_time;
    state.arrival_time = hazard_arrival_times(graph, ignition, ignition_time, params);
    state.intensity.resize(graph.node_count());
    for (std::size_t n = 0; n < state.intensity.size(); ++n) {
        state.intensity[n] = intensity_at(state.arrival_time[n], ignition_time, params);
    }
    return state;
}

double intensity_at(double arrival, double t, const HazardParams& params) {
    if (!(t >= arrival)) return 0.0;
    return params.initial_intensity + params.growth_rate * (t - arrival);
}

double exposure(double arrival, double t0, double t1, const HazardParams& params) {
    if (t1 <= t0 || !(t1 > arrival)) return 0.0;
    const double start = std::max(t0, arrival);
    const double ramp0 = start - arrival;
    const double ramp1 = t1 - arrival;
    return params.initial_intensity * (t1 - start) + 0.5 * params.growth_rate * (ramp1 * ramp1 - ramp0 * ramp0);
}

HazardState advance_hazard(const HazardState& state, double t, const HazardParams& params) {
    if (t < state.time) {
        throw std::invalid_argument("cannot advance hazard backwards from " + std::to_string(state.time) + " to " +
                                    std::to_string(t));
    }
    HazardState next = state;
    next.time = t;
    for (std::size_t n = 0; n < next.intensity.size(); ++n) {
        next.intensity[n] = intensity_at(next.arrival_time[n], t, params);
    }
    return next;
}

double edge_fire_factor(const HazardState& state, const Edge& e, double t, const HazardParams& params) {
    return state.burning(e.a, t) || state.burning(e.b, t) ? params.fire_multiplier : 1.0;
}

double effective_length(const BuildingGraph& graph, std::span<const NodeId> path, const BurningPredicate& burning,
                        double fire_multiplier) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        auto e = graph.find_edge(path[i], path[i + 1]);
        if (!e) {
            throw BuildingError("path step " + std::to_string(path[i]) + " -> " + std::to_string(path[i + 1]) +
                                " is not an edge");
        }
        const double factor = burning(path[i]) || burning(path[i + 1]) ? fire_multiplier : 1.0;
        total += graph.edge(*e).length * factor;
    }
    return total;
}

double effective_length(const HazardState& state, const BuildingGraph& graph, std::span<const NodeId> path, double t,
                        const HazardParams& params) {
    return effective_length(
        graph, path, [&](NodeId n) { return state.burning(n, t); }, params.fire_multiplier);
}

}  // namespace evac
