#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "evac/building.hpp"
#include "evac/goals.hpp"
#include "evac/random.hpp"
#include "evac/rnn.hpp"

namespace evac {

struct Measurement {
    NodeId node = 0;
    double timestamp = 0.0;
    NodeSample sample;
};

/// Exploration packet. visited[0] is the origin and hop_count == visited.size() - 1.
struct SmartPacket {
    NodeId origin = 0;
    std::vector<NodeId> visited;
    int hop_count = 0;
    int hop_limit = 0;
    GoalKind goal = GoalKind::distance;
    std::vector<Measurement> measurements;  // one per visit, in visit order
};

/// Carries a loop-free origin-to-exit route and the samples taken along it back to the origin.
struct Ack {
    Path route;
    std::vector<Measurement> measurements;  // aligned with route
    GoalKind goal = GoalKind::distance;
};

struct RouteEntry {
    Path route;
    double goal_value = 0.0;
    double updated_at = 0.0;
};

/// Bounded list of routes kept sorted best-first (ascending goal value). Equal goal
/// values keep insertion order.
class RoutingTable {
public:
    explicit RoutingTable(std::size_t max_size = 5, double timeout = 30.0);

    /// Inserts or refreshes `route`; the worst entry is evicted when over capacity.
    void upsert(Path route, double goal_value, double now);

    /// Drops entries not refreshed within the timeout.
    void expire(double now);

    const Path* best() const { return entries_.empty() ? nullptr : &entries_.front().route; }
    const std::vector<RouteEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::size_t max_size() const { return max_size_; }
    double timeout() const { return timeout_; }

private:
    std::size_t max_size_;
    double timeout_;
    std::vector<RouteEntry> entries_;
};

std::optional<Path> best_route(const RoutingTable& table);

struct CpnParams {
    double drift_prefire = 0.8;   // probability of following the most excited neuron
    double drift_fire = 0.55;
    int sp_warmup = 10;           // smart packets per node before ignition
    double sp_period = 1.0;       // s between emissions during the evacuation
    std::size_t table_size = 5;
    double route_timeout = 30.0;  // s
    std::map<int, int> hop_limit_by_floor{{1, 60}, {2, 100}, {3, 120}};
    double threshold_smoothing = 0.8;
    double ack_hop_latency = 0.01;  // s per hop on the way back
    RnnInit rnn_init;
};

/// Throws std::invalid_argument on out-of-range values or a floor without a hop limit.
void validate_cpn_params(const CpnParams& params, const BuildingGraph& graph);

int hop_limit_for(const BuildingNode& node, const CpnParams& params);

enum class StepOutcome { moved, reached_exit, dropped };

struct StepResult {
    StepOutcome outcome = StepOutcome::dropped;
    NodeId next = 0;
};

/// Advances the packet one hop from its current node. With probability `drift` it takes
/// the most excited neuron's neighbour, otherwise a uniformly random neighbour.
StepResult step_smart_packet(SmartPacket& sp, const BuildingGraph& graph, const RnnState& rnn, Rng& rng,
                             double drift);

/// Cuts every cycle out of the path: whenever a node reappears, everything between its
/// first and last occurrence is removed. The result is simple and keeps both endpoints.
Path remove_loops(std::span<const NodeId> path);

/// Routing state a decision node keeps for one goal.
struct NodeCpnState {
    RoutingTable table;
    RnnState rnn;
    ThresholdState threshold;
};

using RouteEvaluator = std::function<double(std::span<const NodeId> route)>;

struct AckOutcome {
    bool accepted = false;
    double goal_value = 0.0;
    double reward = 0.0;
    bool rewarded = false;  // reinforcement (true) or punishment branch
};

/// Learning step at `node` for an ACK whose route starts at `node`: store the route, then
/// reward or punish the neuron of the route's first hop against the previous threshold
/// and update the threshold. An ACK whose first hop is not a neighbour is rejected.
AckOutcome process_ack(NodeCpnState& state, const BuildingGraph& graph, NodeId node, const Ack& ack,
                       const RouteEvaluator& goal, double now);

/// Per-node CPN state for every goal in use, plus exploration and ACK delivery.
class CpnNetwork {
public:
    struct GoalSettings {
        GoalParams params;
        double fire_multiplier = 1.0;
        std::map<GoalKind, double> speed;  // reference evacuee speed per goal, cm/s
    };

    CpnNetwork(const BuildingGraph& graph, CpnParams params, std::vector<GoalKind> goals, GoalSettings settings);

    const BuildingGraph& graph() const { return *graph_; }
    const CpnParams& params() const { return params_; }
    const std::vector<GoalKind>& goals() const { return goals_; }

    NodeCpnState& state(NodeId node, GoalKind goal);
    const NodeCpnState& state(NodeId node, GoalKind goal) const;

    /// Hazard arrival forecast used by the safety goal (absolute times); empty before the alarm.
    void set_hazard_forecast(std::vector<double> arrival) { hazard_arrival_ = std::move(arrival); }

    /// Runs one smart packet from `origin` until it reaches an exit or is dropped, sampling
    /// `sensors` at every visit. Returns the ACK for a successful packet.
    std::optional<Ack> explore(NodeId origin, GoalKind goal, double drift, Rng& rng, double now,
                               std::span<const NodeSample> sensors, SmartPacket* trace = nullptr) const;

    /// Walks the ACK back along its route; every node on it learns from its own suffix.
    void deliver(const Ack& ack, double now);

    /// `rounds` smart packets per non-exit node and goal, each delivered immediately.
    void warm_up(int rounds, Rng& rng, double now, std::span<const NodeSample> sensors);

    /// Best stored route at `node` after expiring stale entries.
    const Path* best_route(NodeId node, GoalKind goal, double now);

    std::size_t acks_delivered() const { return acks_delivered_; }
    std::size_t packets_sent() const { return packets_sent_; }
    void count_packet() { ++packets_sent_; }

    /// CSV rows `node,i,j,w_plus,w_minus,q_i` for every node's RNN of `goal`.
    void dump_rnn_csv(std::ostream& out, GoalKind goal) const;

private:
    std::size_t goal_slot(GoalKind goal) const;

    const BuildingGraph* graph_;
    CpnParams params_;
    std::vector<GoalKind> goals_;
    GoalSettings settings_;
    std::vector<std::vector<NodeCpnState>> states_;  // [goal slot][node]
    std::vector<double> hazard_arrival_;
    std::vector<NodeSample> scratch_;
    std::size_t acks_delivered_ = 0;
    std::size_t packets_sent_ = 0;
};

}  // namespace evac
