#include "evac/cpn.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "evac/text.hpp"

namespace evac {

RoutingTable::RoutingTable(std::size_t max_size, double timeout) : max_size_(max_size), timeout_(timeout) {
    if (max_size == 0) throw std::invalid_argument("routing table size must be positive");
    if (!(timeout > 0.0)) throw std::invalid_argument("route timeout must be positive");
}

void RoutingTable::upsert(Path route, double goal_value, double now) {
    if (!(goal_value > 0.0)) throw std::invalid_argument("route goal value must be positive");
    std::erase_if(entries_, [&](const RouteEntry& e) { return e.route == route; });
    auto pos = std::upper_bound(entries_.begin(), entries_.end(), goal_value,
                                [](double g, const RouteEntry& e) { return g < e.goal_value; });
    entries_.insert(pos, RouteEntry{std::move(route), goal_value, now});
    if (entries_.size() > max_size_) entries_.pop_back();
}

void RoutingTable::expire(double now) {
    std::erase_if(entries_, [&](const RouteEntry& e) { return now - e.updated_at > timeout_; });
}

std::optional<Path> best_route(const RoutingTable& table) {
    if (const Path* p = table.best()) return *p;
    return std::nullopt;
}

void validate_cpn_params(const CpnParams& params, const BuildingGraph& graph) {
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in_unit(params.drift_prefire) || !in_unit(params.drift_fire)) {
        throw std::invalid_argument("drift must lie in [0, 1]");
    }
    if (params.sp_warmup < 0) throw std::invalid_argument("sp warm-up count must be >= 0");
    if (!(params.sp_period > 0.0)) throw std::invalid_argument("sp period must be positive");
    if (params.table_size == 0) throw std::invalid_argument("table size must be positive");
    if (!(params.route_timeout > 0.0)) throw std::invalid_argument("route timeout must be positive");
    if (params.ack_hop_latency < 0.0) throw std::invalid_argument("ack hop latency must be >= 0");
    for (const auto& [floor, limit] : params.hop_limit_by_floor) {
        if (limit <= 0) throw std::invalid_argument("hop limit for floor " + std::to_string(floor) + " must be > 0");
    }
    for (const auto& node : graph.nodes()) {
        if (!params.hop_limit_by_floor.contains(node.floor)) {
            throw std::invalid_argument("no hop limit configured for floor " + std::to_string(node.floor));
        }
    }
}

int hop_limit_for(const BuildingNode& node, const CpnParams& params) {
    auto it = params.hop_limit_by_floor.find(node.floor);
    if (it == params.hop_limit_by_floor.end()) {
        throw std::invalid_argument("no hop limit configured for floor " + std::to_string(node.floor));
    }
    return it->second;
}

StepResult step_smart_packet(SmartPacket& sp, const BuildingGraph& graph, const RnnState& rnn, Rng& rng,
                             double drift) {
    const NodeId at = sp.visited.back();
    if (graph.is_exit(at)) return {StepOutcome::reached_exit, at};
    const auto neighbors = graph.neighbors(at);
    if (neighbors.empty() || sp.hop_count + 1 > sp.hop_limit) return {StepOutcome::dropped, at};

    std::size_t pick;
    if (rng.bernoulli(drift)) {
        pick = most_excited(rnn);
    } else {
        pick = static_cast<std::size_t>(rng.index(neighbors.size()));
    }
    const NodeId next = neighbors[pick].node;
    sp.visited.push_back(next);
    ++sp.hop_count;
    return {StepOutcome::moved, next};
}

Path remove_loops(std::span<const NodeId> path) {
    std::unordered_map<NodeId, std::size_t> last;
    for (std::size_t i = 0; i < path.size(); ++i) last[path[i]] = i;
    Path out;
    for (std::size_t i = 0; i < path.size();) {
        out.push_back(path[i]);
        i = last[path[i]] + 1;
    }
    return out;
}

AckOutcome process_ack(NodeCpnState& state, const BuildingGraph& graph, NodeId node, const Ack& ack,
                       const RouteEvaluator& goal, double now) {
    AckOutcome outcome;
    if (ack.route.size() < 2 || ack.route.front() != node) return outcome;
    const auto neighbors = graph.neighbors(node);
    auto hop = std::find_if(neighbors.begin(), neighbors.end(), [&](const Neighbor& nb) { return nb.node == ack.route[1]; });
    if (hop == neighbors.end()) return outcome;
    const auto winner = static_cast<std::size_t>(hop - neighbors.begin());

    outcome.accepted = true;
    outcome.goal_value = goal(ack.route);
    outcome.reward = reward(outcome.goal_value);
    if (outcome.goal_value > 0.0) state.table.upsert(ack.route, outcome.goal_value, now);

    const double threshold_prev = state.threshold.initialized() ? state.threshold.value() : 0.0;
    outcome.rewarded = threshold_prev <= outcome.reward;
    reinforce(state.rnn, winner, outcome.reward, threshold_prev);
    state.threshold.update(outcome.reward);
    state.table.expire(now);
    return outcome;
}

CpnNetwork::CpnNetwork(const BuildingGraph& graph, CpnParams params, std::vector<GoalKind> goals,
                       GoalSettings settings)
    : graph_(&graph), params_(std::move(params)), goals_(std::move(goals)), settings_(std::move(settings)) {
    validate_cpn_params(params_, graph);
    if (goals_.empty()) throw std::invalid_argument("CPN needs at least one goal");
    for (auto goal : goals_) {
        if (!settings_.speed.contains(goal)) settings_.speed[goal] = 150.0;
        std::vector<NodeCpnState> per_node;
        per_node.reserve(graph.node_count());
        for (const auto& n : graph.nodes()) {
            per_node.push_back(NodeCpnState{RoutingTable(params_.table_size, params_.route_timeout),
                                            make_rnn(std::max<std::size_t>(graph.degree(n.id), 1), params_.rnn_init),
                                            ThresholdState(params_.threshold_smoothing)});
        }
        states_.push_back(std::move(per_node));
    }
    scratch_.resize(graph.node_count());
}

std::size_t CpnNetwork::goal_slot(GoalKind goal) const {
    auto it = std::find(goals_.begin(), goals_.end(), goal);
    if (it == goals_.end()) throw std::invalid_argument("goal `" + std::string(to_string(goal)) + "` is not routed");
    return static_cast<std::size_t>(it - goals_.begin());
}

NodeCpnState& CpnNetwork::state(NodeId node, GoalKind goal) { return states_[goal_slot(goal)].at(node); }

const NodeCpnState& CpnNetwork::state(NodeId node, GoalKind goal) const {
    return states_[goal_slot(goal)].at(node);
}

std::optional<Ack> CpnNetwork::explore(NodeId origin, GoalKind goal, double drift, Rng& rng, double now,
                                       std::span<const NodeSample> sensors, SmartPacket* trace) const {
    const auto slot = goal_slot(goal);
    SmartPacket sp;
    sp.origin = origin;
    sp.visited.push_back(origin);
    sp.hop_limit = hop_limit_for(graph_->node(origin), params_);
    sp.goal = goal;
    sp.measurements.push_back({origin, now, sensors[origin]});

    std::optional<Ack> ack;
    while (true) {
        const NodeId at = sp.visited.back();
        const auto step = step_smart_packet(sp, *graph_, states_[slot][at].rnn, rng, drift);
        if (step.outcome == StepOutcome::moved) {
            sp.measurements.push_back({step.next, now, sensors[step.next]});
            continue;
        }
        if (step.outcome == StepOutcome::reached_exit) {
            Ack result;
            result.goal = goal;
            result.route = remove_loops(sp.visited);
            // The latest visit of each route node carries its freshest sample.
            std::unordered_map<NodeId, const Measurement*> latest;
            for (const auto& m : sp.measurements) latest[m.node] = &m;
            for (auto n : result.route) result.measurements.push_back(*latest.at(n));
            ack = std::move(result);
        }
        break;
    }
    if (trace != nullptr) *trace = std::move(sp);
    return ack;
}

void CpnNetwork::deliver(const Ack& ack, double now) {
    if (ack.route.size() < 2) return;
    const auto slot = goal_slot(ack.goal);
    for (const auto& m : ack.measurements) scratch_[m.node] = m.sample;

    GoalContext ctx;
    ctx.graph = graph_;
    ctx.samples = scratch_;
    ctx.now = now;
    ctx.speed = settings_.speed.at(ack.goal);
    ctx.fire_multiplier = settings_.fire_multiplier;
    ctx.hazard_arrival = hazard_arrival_;
    const RouteEvaluator goal = [&](std::span<const NodeId> route) {
        return evaluate_goal(ack.goal, route, ctx, settings_.params);
    };

    // Back along the route: each node trains on the suffix that starts at it.
    Ack suffix;
    suffix.goal = ack.goal;
    for (std::size_t k = ack.route.size() - 1; k-- > 0;) {
        const NodeId node = ack.route[k];
        suffix.route.assign(ack.route.begin() + static_cast<std::ptrdiff_t>(k), ack.route.end());
        process_ack(states_[slot][node], *graph_, node, suffix, goal, now);
    }
    for (const auto& m : ack.measurements) scratch_[m.node] = NodeSample{};
    ++acks_delivered_;
}

void CpnNetwork::warm_up(int rounds, Rng& rng, double now, std::span<const NodeSample> sensors) {
    for (int round = 0; round < rounds; ++round) {
        for (auto goal : goals_) {
            for (const auto& node : graph_->nodes()) {
                if (node.is_exit) continue;
                ++packets_sent_;
                if (auto ack = explore(node.id, goal, params_.drift_prefire, rng, now, sensors)) deliver(*ack, now);
            }
        }
    }
}

const Path* CpnNetwork::best_route(NodeId node, GoalKind goal, double now) {
    auto& table = state(node, goal).table;
    table.expire(now);
    return table.best();
}

void CpnNetwork::dump_rnn_csv(std::ostream& out, GoalKind goal) const {
    const auto slot = goal_slot(goal);
    out << "node,i,j,w_plus,w_minus,q_i\n";
    for (NodeId node = 0; node < graph_->node_count(); ++node) {
        const auto& rnn = states_[slot][node].rnn;
        for (std::size_t i = 0; i < rnn.n; ++i) {
            for (std::size_t j = 0; j < rnn.n; ++j) {
                out << node << ',' << i << ',' << j << ',' << format_double(rnn.wp(i, j)) << ','
                    << format_double(rnn.wm(i, j)) << ',' << format_double(rnn.q[i]) << '\n';
            }
        }
    }
}

}  // namespace evac
