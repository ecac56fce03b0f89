#pragma once

#include <functional>
#include <span>
#include <vector>

#include "evac/building.hpp"

namespace evac {

/// Rolling arrival-rate estimate for one node.
struct NodeQueueStats {
    double arrival_rate = 0.0;   // R_c, 1/s
    double last_arrival = 0.0;   // T_h, s
    bool seen_arrival = false;
    double service_rate = 1.0;   // mu, 1/s
    int current_queue = 0;       // persons waiting right now
    double smoothing = 0.4;      // a, 0 < a < 1

    /// R_c <- a R_h + (1 - a) / (T_c - T_h). The first arrival only records T_h.
    /// Throws std::logic_error if `now` does not move strictly forward.
    void record_arrival(double now);

    /// rho = R_c / mu.
    double utilization() const { return arrival_rate / service_rate; }

    /// Utilization as a sensor reads it at `now`: the rate is capped at one arrival per
    /// second elapsed since the last one, so an idle node cools down.
    double utilization_at(double now) const;
};

constexpr double kUtilizationCap = 0.99;

struct QueueLength {
    double value = 0.0;
    bool saturated = false;
};

/// Steady-state M/M/1 mean queue length rho / (1 - rho), held at the value for rho = 0.99
/// once rho reaches that cap.
QueueLength expected_queue_length(double rho);

/// What a forecast needs to know about a node.
struct NodeLoad {
    double rho = 0.0;
    int queue = 0;
};

using LoadLookup = std::function<NodeLoad(NodeId)>;

struct CongestionCoefficients {
    double wait_per_expected = 1.0;  // s per person of predicted queue
    double wait_per_queued = 1.0;    // s per person currently queued
};

struct CongestionForecast {
    double congestion = 0.0;         // C_total
    double travel_time = 0.0;        // t_total, s
    std::vector<double> node_etas;   // time to reach each path node, s; node_etas[0] = 0
    bool saturated = false;          // some node had rho >= cap
};

/// Walks the path edge by edge: free-flow time length / speed, plus the predicted wait at
/// the edge's source node, plus the part of the current queue there that is still present
/// when the evacuee arrives. Each node adds its rho to the expected congestion and one more
/// if its current queue outlasts the evacuee's arrival.
CongestionForecast predict_path_congestion(const BuildingGraph& graph, std::span<const NodeId> path, double speed,
                                           const LoadLookup& load, const CongestionCoefficients& coeffs = {});

CongestionForecast predict_path_congestion(const BuildingGraph& graph, std::span<const NodeId> path, double speed,
                                           std::span<const NodeQueueStats> stats,
                                           const CongestionCoefficients& coeffs = {});

}  // namespace evac
