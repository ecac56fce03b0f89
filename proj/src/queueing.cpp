#include "evac/queueing.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace evac {

void NodeQueueStats::record_arrival(double now) {
    if (!seen_arrival) {
        arrival_rate = 0.0;
        last_arrival = now;
        seen_arrival = true;
        return;
    }
    if (!(now > last_arrival)) {
        throw std::logic_error("arrival at " + std::to_string(now) + " does not follow previous arrival at " +
                               std::to_string(last_arrival));
    }
    arrival_rate = smoothing * arrival_rate + (1.0 - smoothing) / (now - last_arrival);
    last_arrival = now;
}

double NodeQueueStats::utilization_at(double now) const {
    if (!seen_arrival) return 0.0;
    double rate = arrival_rate;
    if (now > last_arrival) rate = std::min(rate, 1.0 / (now - last_arrival));
    return rate / service_rate;
}

QueueLength expected_queue_length(double rho) {
    if (rho < 0.0) throw std::invalid_argument("utilization must be non-negative");
    if (rho >= kUtilizationCap) return {kUtilizationCap / (1.0 - kUtilizationCap), true};
    return {rho / (1.0 - rho), false};
}

CongestionForecast predict_path_congestion(const BuildingGraph& graph, std::span<const NodeId> path, double speed,
                                           const LoadLookup& load, const CongestionCoefficients& coeffs) {
    if (!(speed > 0.0)) throw std::invalid_argument("speed must be positive");
    CongestionForecast f;
    if (path.empty()) return f;
    f.node_etas.reserve(path.size());
    f.node_etas.push_back(0.0);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        auto e = graph.find_edge(path[i], path[i + 1]);
        if (!e) {
            throw BuildingError("path step " + std::to_string(path[i]) + " -> " + std::to_string(path[i + 1]) +
                                " is not an edge");
        }
        const NodeLoad source = load(path[i]);
        double t_edge = graph.edge(*e).length / speed;
        f.congestion += source.rho;
        const auto predicted = expected_queue_length(source.rho);
        f.saturated = f.saturated || predicted.saturated;
        t_edge += coeffs.wait_per_expected * predicted.value;
        if (source.queue != 0) {
            const double t_queue = coeffs.wait_per_queued * source.queue;
            if (t_queue > f.travel_time) {
                f.congestion += 1.0;
                t_edge += t_queue - f.travel_time;
            }
        }
        f.travel_time += t_edge;
        f.node_etas.push_back(f.travel_time);
    }
    return f;
}

CongestionForecast predict_path_congestion(const BuildingGraph& graph, std::span<const NodeId> path, double speed,
                                           std::span<const NodeQueueStats> stats,
                                           const CongestionCoefficients& coeffs) {
    return predict_path_congestion(
        graph, path, speed,
        [&](NodeId n) {
            const auto& s = stats[n];
            return NodeLoad{s.utilization(), s.current_queue};
        },
        coeffs);
}

}  // namespace evac
