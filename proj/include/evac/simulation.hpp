#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evac/building.hpp"
#include "evac/cpn.hpp"
#include "evac/hazard.hpp"
#include "evac/queueing.hpp"
#include "evac/scenario.hpp"

namespace evac {

enum class EvacueeState { moving, queued, evacuated, dead };

std::string_view to_string(EvacueeState state);

struct Evacuee {
    std::uint32_t id = 0;
    Category category = Category::normal;
    double speed = 150.0;  // cm/s
    double health = 100.0;
    EvacueeState state = EvacueeState::moving;

    NodeId node = 0;                 // current node, or the node an edge was entered from
    std::optional<NodeId> heading;   // set while walking an edge
    std::optional<NodeId> previous;  // node before `node`, for turn accounting

    Path assigned_route;     // CPN route being followed; empty when none
    std::size_t route_pos = 0;  // index of `node` in assigned_route
    int hops_since_switch = 0;
    int movement_depth = 1;

    std::vector<char> known_burning;  // nodes this evacuee has seen on fire (autonomous behaviour)

    int brakes = 0;
    double distance = 0.0;  // cm walked
    double turning = 0.0;   // degrees turned
    double energy_used = 0.0;

    double evacuation_time = 0.0;  // s after the alarm, once evacuated
    double settled_at = 0.0;       // hazard damage accounted up to this time
    Path trajectory;               // every node entered, in order
};

/// Remaining health after `exposure` (intensity x seconds) at the given damage rate and
/// category multiplier; the evacuee dies at 0.
void apply_exposure(Evacuee& ev, double exposure, double damage_rate, double multiplier);

/// health <- max(0, health - damage_rate * multiplier * intensity * dt).
void apply_hazard_damage(Evacuee& ev, double intensity, double dt, double damage_rate, double multiplier);

/// Slots and waiting line of one node.
class NodeOccupancy {
public:
    explicit NodeOccupancy(int capacity = 1);

    struct Arrival {
        bool admitted = false;
        bool congestion = false;  // had to wait: one event per wait episode
    };

    /// Admits if a slot is free and nobody is waiting, otherwise queues FIFO.
    Arrival arrive(std::uint32_t evacuee);

    /// Frees a slot; returns the waiting evacuee admitted into it, if any.
    std::optional<std::uint32_t> release();

    /// Drops a waiting evacuee (e.g. on death). Returns false if it was not waiting.
    bool remove_waiting(std::uint32_t evacuee);

    /// Places an evacuee without counting congestion: admitted if a slot is free, else queued.
    bool place(std::uint32_t evacuee);

    int capacity() const { return capacity_; }
    int occupants() const { return occupants_; }
    const std::deque<std::uint32_t>& waiting() const { return waiting_; }

private:
    int capacity_;
    int occupants_ = 0;
    std::deque<std::uint32_t> waiting_;
};

/// What the routing policies can see of the building at decision time.
struct HazardView {
    const BuildingGraph* graph = nullptr;
    std::span<const double> arrival;  // t_hr per node
    double now = 0.0;
    double fire_multiplier = 1.0;
    double block_intensity = 8.0;
    const HazardParams* params = nullptr;
    std::span<const double> length_field;  // cost-to-exit by plain length; computed on demand when empty

    bool burning(NodeId n) const { return now >= arrival[n]; }
    bool blocked(NodeId n) const;
};

/// A routing decision: a next hop, or wait in place and decide again later.
struct HopDecision {
    std::optional<NodeId> next;
    bool wait() const { return !next.has_value(); }
};

/// Picks the neighbour of `from` minimising edge cost + cost-to-exit, skipping neighbours
/// for which `usable` is false. Ties go to the smaller id.
std::optional<NodeId> best_neighbor(const BuildingGraph& graph, std::span<const double> to_exit, NodeId from,
                                    const EdgeWeight& weight, const std::function<bool(NodeId)>& usable);

/// Own shortest path on the built-in map, avoiding every edge touching a node the evacuee
/// has seen burning. A burning next hop is remembered and the route recomputed. With no
/// fire-free route left it takes the least-bad known route; a blocked next hop means wait.
HopDecision policy_autonomous(Evacuee& ev, const HazardView& view);

/// Cost-to-exit field for the centralized baseline: effective length, with edges into
/// blocked nodes removed.
std::vector<double> global_hazard_field(const HazardView& view);

/// Follows the global effective-length shortest path.
HopDecision policy_dijkstra(const Evacuee& ev, const HazardView& view, std::span<const double> field,
                            std::span<const double> fallback_field);

/// Keeps the assigned route for `movement_depth` hops, then adopts the best usable route
/// in the node's table. A blocked next hop forces a switch. No usable route: autonomous.
HopDecision policy_cpn(Evacuee& ev, const RoutingTable& table, const HazardView& view);

struct TrialMetrics {
    std::uint64_t seed = 0;
    Policy policy = Policy::cpn;
    int evacuees = 0;
    double survivor_fraction = 1.0;
    int deaths = 0;
    int congestion = 0;
    double avg_evacuation_time = 0.0;  // s, over survivors
    double avg_health = 100.0;         // over everyone
    double total_energy = 0.0;
    bool truncated = false;            // time cap hit with evacuees still inside
};

/// `seed,policy,evacuees,survivor_fraction,deaths,congestion,avg_evac_time_s,avg_health,total_energy`
std::string metrics_csv_header();
std::string metrics_csv_row(const TrialMetrics& m);

struct NodeMetrics {
    double arrival_rate = 0.0;  // final R_c
    int peak_queue = 0;
    int saturated_samples = 0;  // sensor reads with rho at the cap
};

struct TrialResult {
    TrialMetrics metrics;
    std::vector<Evacuee> evacuees;
    std::vector<NodeMetrics> nodes;
    double end_time = 0.0;
    std::size_t events = 0;
    std::size_t smart_packets = 0;
    std::size_t acks = 0;
};

struct TrialOptions {
    /// Called after every processed event with the event time and all evacuees.
    std::function<void(double, const std::vector<Evacuee>&)> observer;
    /// Called once at the end with the trial's CPN state (CPN policy only).
    std::function<void(const CpnNetwork&)> inspect_network;
};

/// Runs one seeded trial. Identical (config, seed) give identical results.
TrialResult run_trial(const ScenarioConfig& config, std::uint64_t seed, const TrialOptions& options = {});

/// Goals the CPN routes for under this config, in canonical order.
std::vector<GoalKind> routed_goals(const ScenarioConfig& config);

}  // namespace evac
