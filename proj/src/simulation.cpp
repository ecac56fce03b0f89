#include "evac/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "evac/random.hpp"
#include "evac/text.hpp"

namespace evac {

std::string_view to_string(EvacueeState state) {
    switch (state) {
        case EvacueeState::moving: return "moving";
        case EvacueeState::queued: return "queued";
        case EvacueeState::evacuated: return "evacuated";
        case EvacueeState::dead: return "dead";
    }
    return "?";
}

void apply_exposure(Evacuee& ev, double exposure, double damage_rate, double multiplier) {
    if (exposure < 0.0) throw std::invalid_argument("exposure must be non-negative");
    if (exposure == 0.0 || ev.state == EvacueeState::dead) return;
    ev.health = std::max(0.0, ev.health - damage_rate * multiplier * exposure);
    if (ev.health == 0.0) ev.state = EvacueeState::dead;
}

void apply_hazard_damage(Evacuee& ev, double intensity, double dt, double damage_rate, double multiplier) {
    if (dt < 0.0) throw std::invalid_argument("dt must be non-negative");
    apply_exposure(ev, intensity * dt, damage_rate, multiplier);
}

NodeOccupancy::NodeOccupancy(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw std::invalid_argument("node capacity must be >= 1");
}

NodeOccupancy::Arrival NodeOccupancy::arrive(std::uint32_t evacuee) {
    if (occupants_ < capacity_ && waiting_.empty()) {
        ++occupants_;
        return {true, false};
    }
    waiting_.push_back(evacuee);
    return {false, true};
}

std::optional<std::uint32_t> NodeOccupancy::release() {
    if (occupants_ == 0) throw std::logic_error("release on an empty node");
    --occupants_;
    if (waiting_.empty()) return std::nullopt;
    const auto next = waiting_.front();
    waiting_.pop_front();
    ++occupants_;
    return next;
}

bool NodeOccupancy::remove_waiting(std::uint32_t evacuee) {
    auto it = std::find(waiting_.begin(), waiting_.end(), evacuee);
    if (it == waiting_.end()) return false;
    waiting_.erase(it);
    return true;
}

bool NodeOccupancy::place(std::uint32_t evacuee) {
    if (occupants_ < capacity_) {
        ++occupants_;
        return true;
    }
    waiting_.push_back(evacuee);
    return false;
}

bool HazardView::blocked(NodeId n) const {
    return burning(n) && intensity_at(arrival[n], now, *params) >= block_intensity;
}

std::optional<NodeId> best_neighbor(const BuildingGraph& graph, std::span<const double> to_exit, NodeId from,
                                    const EdgeWeight& weight, const std::function<bool(NodeId)>& usable) {
    if (graph.is_exit(from)) return std::nullopt;
    const auto neighbors = graph.neighbors(from);
    std::vector<double> cost(neighbors.size(), kInfinity);
    double best = kInfinity;
    for (std::size_t k = 0; k < neighbors.size(); ++k) {
        const auto& nb = neighbors[k];
        if (!usable(nb.node)) continue;
        cost[k] = weight(graph.edge(nb.edge), nb.edge) + to_exit[nb.node];
        best = std::min(best, cost[k]);
    }
    if (!std::isfinite(best)) return std::nullopt;
    const double slack = 1e-9 * std::max(1.0, std::abs(best));
    for (std::size_t k = 0; k < neighbors.size(); ++k) {
        if (cost[k] <= best + slack) return neighbors[k].node;
    }
    return std::nullopt;
}

namespace {

bool always(NodeId) { return true; }

EdgeWeight effective_weight(const HazardView& view) {
    return [&view](const Edge& e, EdgeId) {
        return view.burning(e.a) || view.burning(e.b) ? e.length * view.fire_multiplier : e.length;
    };
}

}  // namespace

HopDecision policy_autonomous(Evacuee& ev, const HazardView& view) {
    const auto& graph = *view.graph;
    if (ev.known_burning.size() != graph.node_count()) ev.known_burning.assign(graph.node_count(), 0);
    const NodeId at = ev.node;
    auto avoided = [&](NodeId n) { return n != at && ev.known_burning[n] != 0; };
    const EdgeWeight clear = [&](const Edge& e, EdgeId) {
        return avoided(e.a) || avoided(e.b) ? kInfinity : e.length;
    };

    std::vector<double> field;
    while (true) {
        const bool knows_fire = std::any_of(ev.known_burning.begin(), ev.known_burning.end(), [](char c) { return c; });
        std::span<const double> to_exit = view.length_field;
        if (knows_fire || to_exit.empty()) {
            field = distances_to_exits(graph, clear);
            to_exit = field;
        }
        const auto next = best_neighbor(graph, to_exit, at, clear, always);
        if (!next) break;
        if (view.burning(*next)) {
            ev.known_burning[*next] = 1;
            continue;
        }
        if (view.blocked(*next)) return {};
        return {*next};
    }

    // Every known route crosses fire: take the least-bad one.
    const EdgeWeight penalized = [&](const Edge& e, EdgeId) {
        return ev.known_burning[e.a] || ev.known_burning[e.b] ? e.length * view.fire_multiplier : e.length;
    };
    field = distances_to_exits(graph, penalized);
    const auto next = best_neighbor(graph, field, at, penalized, always);
    if (!next || view.blocked(*next)) return {};
    return {*next};
}

std::vector<double> global_hazard_field(const HazardView& view) {
    const auto effective = effective_weight(view);
    return distances_to_exits(*view.graph, [&](const Edge& e, EdgeId id) {
        return view.blocked(e.a) || view.blocked(e.b) ? kInfinity : effective(e, id);
    });
}

HopDecision policy_dijkstra(const Evacuee& ev, const HazardView& view, std::span<const double> field,
                            std::span<const double> fallback_field) {
    const auto& graph = *view.graph;
    const auto effective = effective_weight(view);
    if (auto next = best_neighbor(graph, field, ev.node, effective, [&](NodeId n) { return !view.blocked(n); })) {
        return {*next};
    }
    const auto next = best_neighbor(graph, fallback_field, ev.node, effective, always);
    if (!next || view.blocked(*next)) return {};
    return {*next};
}

HopDecision policy_cpn(Evacuee& ev, const RoutingTable& table, const HazardView& view) {
    const auto& route = ev.assigned_route;
    const bool on_route = ev.route_pos + 1 < route.size() && route[ev.route_pos] == ev.node;
    if (on_route && ev.hops_since_switch < ev.movement_depth && !view.blocked(route[ev.route_pos + 1])) {
        return {route[ev.route_pos + 1]};
    }
    for (const auto& entry : table.entries()) {
        if (entry.route.size() < 2 || entry.route.front() != ev.node) continue;
        if (view.blocked(entry.route[1])) continue;
        ev.assigned_route = entry.route;
        ev.route_pos = 0;
        ev.hops_since_switch = 0;
        return {entry.route[1]};
    }
    ev.assigned_route.clear();
    ev.route_pos = 0;
    ev.hops_since_switch = 0;
    return policy_autonomous(ev, view);
}

std::string metrics_csv_header() {
    return "seed,policy,evacuees,survivor_fraction,deaths,congestion,avg_evac_time_s,avg_health,total_energy";
}

std::string metrics_csv_row(const TrialMetrics& m) {
    std::string row = std::to_string(m.seed);
    row += ',';
    row += to_string(m.policy);
    row += ',' + std::to_string(m.evacuees);
    row += ',' + format_double(m.survivor_fraction);
    row += ',' + std::to_string(m.deaths);
    row += ',' + std::to_string(m.congestion);
    row += ',' + format_double(m.avg_evacuation_time);
    row += ',' + format_double(m.avg_health);
    row += ',' + format_double(m.total_energy);
    return row;
}

std::vector<GoalKind> routed_goals(const ScenarioConfig& config) {
    std::vector<GoalKind> goals;
    for (auto goal : kAllGoals) {
        for (auto c : kAllCategories) {
            if (config.params(c).share > 0.0 && config.goal_for(c) == goal) {
                goals.push_back(goal);
                break;
            }
        }
    }
    return goals;
}

namespace {

// Lower value runs first among events at the same instant.
enum class EventKind : int { fire_alarm, hazard_tick, ack_delivery, sp_emission, edge_departure, node_arrival };

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::hazard_tick;
    std::uint64_t id = 0;
    std::uint64_t seq = 0;
    std::uint32_t generation = 0;
};

struct RunsLater {
    bool operator()(const Event& a, const Event& b) const {
        return std::tie(a.time, a.kind, a.id, a.seq) > std::tie(b.time, b.kind, b.id, b.seq);
    }
};

class Trial {
public:
    Trial(const ScenarioConfig& config, std::uint64_t seed, const TrialOptions& options)
        : cfg_(config),
          graph_(*config.building),
          seed_(seed),
          options_(options),
          t0_(config.ignition_time),
          arrival_(hazard_arrival_times(graph_, config.ignition_node, config.ignition_time, config.hazard)),
          sensors_(graph_.node_count()),
          node_metrics_(graph_.node_count()),
          cpn_rng_(split_seed(seed, "cpn")) {
        view_.graph = &graph_;
        view_.arrival = arrival_;
        view_.now = t0_;
        view_.fire_multiplier = cfg_.hazard.fire_multiplier;
        view_.block_intensity = cfg_.block_intensity;
        view_.params = &cfg_.hazard;
        length_field_ = distances_to_exits(graph_, length_weight());
        view_.length_field = length_field_;

        for (const auto& n : graph_.nodes()) {
            occupancy_.emplace_back(n.capacity);
            NodeQueueStats s;
            s.service_rate = 1.0 / cfg_.service_time;
            s.smoothing = cfg_.queue_smoothing;
            stats_.push_back(s);
        }
    }

    TrialResult run() {
        place_evacuees();
        if (cfg_.policy == Policy::cpn) start_cpn();
        push(t0_, EventKind::fire_alarm, 0);

        const double cap = t0_ + cfg_.time_cap;
        std::size_t processed = 0;
        double clock = t0_;
        bool truncated = false;
        while (inside_ > 0 && !queue_.empty()) {
            const Event ev = queue_.top();
            if (ev.time > cap) {
                truncated = true;
                break;
            }
            queue_.pop();
            clock = ev.time;
            view_.now = clock;
            dispatch(ev);
            ++processed;
            if (options_.observer) options_.observer(clock, evacuees_);
        }
        if (truncated) {
            clock = cap;
            view_.now = clock;
            for (auto& e : evacuees_) settle(e, clock);
            truncated = inside_ > 0;
        }

        TrialResult result;
        result.end_time = clock;
        result.events = processed;
        result.metrics = summarize(truncated);
        for (NodeId n = 0; n < graph_.node_count(); ++n) node_metrics_[n].arrival_rate = stats_[n].arrival_rate;
        result.nodes = node_metrics_;
        if (network_) {
            result.smart_packets = network_->packets_sent();
            result.acks = network_->acks_delivered();
            if (options_.inspect_network) options_.inspect_network(*network_);
        }
        result.evacuees = std::move(evacuees_);
        return result;
    }

private:
    void push(double time, EventKind kind, std::uint64_t id, std::uint32_t generation = 0) {
        queue_.push(Event{time, kind, id, next_seq_++, generation});
    }

    void place_evacuees() {
        const int count = cfg_.evacuees;
        std::vector<NodeId> starts;
        if (!cfg_.initial_nodes.empty()) {
            starts = cfg_.initial_nodes;
        } else {
            std::vector<NodeId> slots;
            for (const auto& n : graph_.nodes()) {
                if (!n.is_exit) slots.insert(slots.end(), static_cast<std::size_t>(n.capacity), n.id);
            }
            if (static_cast<std::size_t>(count) > slots.size()) {
                throw ConfigError("more evacuees than free places in the building");
            }
            Rng rng(split_seed(seed_, "placement"));
            for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) {
                const auto j = i + rng.index(slots.size() - i);
                std::swap(slots[i], slots[j]);
                starts.push_back(slots[i]);
            }
        }

        double total_share = 0.0;
        for (auto c : kAllCategories) total_share += cfg_.params(c).share;
        Rng category_rng(split_seed(seed_, "categories"));

        evacuees_.resize(static_cast<std::size_t>(count));
        generation_.assign(static_cast<std::size_t>(count), 0);
        for (std::size_t i = 0; i < evacuees_.size(); ++i) {
            auto& ev = evacuees_[i];
            ev.id = static_cast<std::uint32_t>(i);
            double draw = category_rng.uniform01() * total_share;
            ev.category = Category::normal;
            for (auto c : kAllCategories) {
                const double share = cfg_.params(c).share;
                if (share <= 0.0) continue;
                ev.category = c;
                if (draw < share) break;
                draw -= share;
            }
            ev.speed = cfg_.params(ev.category).speed;
            ev.movement_depth = cfg_.movement_depth;
            ev.node = starts[i];
            ev.trajectory.push_back(ev.node);
            ev.known_burning.assign(graph_.node_count(), 0);
            ev.settled_at = t0_;
            if (graph_.is_exit(ev.node)) {
                ev.state = EvacueeState::evacuated;
                ev.evacuation_time = 0.0;
                continue;
            }
            ++inside_;
            if (occupancy_[ev.node].place(ev.id)) {
                ev.state = EvacueeState::moving;
                push(t0_ + cfg_.service_time, EventKind::edge_departure, ev.id, 0);
            } else {
                ev.state = EvacueeState::queued;
            }
        }
        for (NodeId n = 0; n < graph_.node_count(); ++n) note_queue(n);
    }

    void start_cpn() {
        CpnNetwork::GoalSettings settings;
        settings.params = cfg_.goal_params;
        settings.fire_multiplier = cfg_.hazard.fire_multiplier;
        const auto goals = routed_goals(cfg_);
        for (auto goal : goals) {
            double slowest = kInfinity;
            for (auto c : kAllCategories) {
                if (cfg_.params(c).share > 0.0 && cfg_.goal_for(c) == goal) slowest = std::min(slowest, cfg_.params(c).speed);
            }
            settings.speed[goal] = slowest;
        }
        network_.emplace(graph_, cfg_.cpn, goals, settings);
        // Before the fire: nothing burns and no queues have formed.
        network_->warm_up(cfg_.cpn.sp_warmup, cpn_rng_, t0_, sensors_);
    }

    void dispatch(const Event& e) {
        switch (e.kind) {
            case EventKind::fire_alarm: on_alarm(e.time); break;
            case EventKind::hazard_tick: on_hazard_tick(e.time); break;
            case EventKind::ack_delivery: on_ack(e); break;
            case EventKind::sp_emission: on_emission(e.time); break;
            case EventKind::edge_departure:
                if (e.generation == generation_[e.id]) on_departure(evacuees_[e.id], e.time);
                break;
            case EventKind::node_arrival:
                if (e.generation == generation_[e.id]) on_arrival(evacuees_[e.id], e.time);
                break;
        }
    }

    void on_alarm(double t) {
        if (network_) {
            network_->set_hazard_forecast(arrival_);
            push(t, EventKind::sp_emission, 0);
        }
        push(t, EventKind::hazard_tick, 0);
    }

    void on_hazard_tick(double t) {
        refresh_sensors(t, false);
        for (auto& ev : evacuees_) settle(ev, t);
        if (cfg_.policy == Policy::dijkstra) refresh_global_field();
        push(t + cfg_.hazard_tick, EventKind::hazard_tick, 0);
    }

    void refresh_global_field() {
        std::size_t changes = 0;
        for (NodeId n = 0; n < graph_.node_count(); ++n) changes += view_.burning(n) + view_.blocked(n);
        if (changes == hazard_signature_ && !global_field_.empty()) return;
        hazard_signature_ = changes;
        global_field_ = global_hazard_field(view_);
        fallback_field_ = distances_to_exits(graph_, effective_weight(view_));
    }

    void refresh_sensors(double t, bool with_load) {
        for (NodeId n = 0; n < graph_.node_count(); ++n) {
            auto& s = sensors_[n];
            s.burning = t >= arrival_[n];
            s.intensity = intensity_at(arrival_[n], t, cfg_.hazard);
            if (with_load) {
                s.rho = stats_[n].utilization_at(t);
                if (s.rho >= kUtilizationCap) ++node_metrics_[n].saturated_samples;
            }
        }
    }

    void on_emission(double t) {
        refresh_sensors(t, true);
        for (auto goal : network_->goals()) {
            for (const auto& node : graph_.nodes()) {
                if (node.is_exit) continue;
                network_->count_packet();
                SmartPacket trace;
                auto ack = network_->explore(node.id, goal, cfg_.cpn.drift_fire, cpn_rng_, t, sensors_, &trace);
                if (!ack) continue;
                const auto hops = static_cast<double>(trace.hop_count + ack->route.size() - 1);
                const auto key = next_ack_++;
                pending_acks_.emplace(key, std::move(*ack));
                push(t + cfg_.cpn.ack_hop_latency * hops, EventKind::ack_delivery, key);
            }
        }
        push(t + cfg_.cpn.sp_period, EventKind::sp_emission, 0);
    }

    void on_ack(const Event& e) {
        auto it = pending_acks_.find(e.id);
        network_->deliver(it->second, e.time);
        pending_acks_.erase(it);
    }

    void on_departure(Evacuee& ev, double t) {
        settle(ev, t);
        if (ev.state == EvacueeState::dead) return;
        const auto decision = decide(ev, t);
        if (decision.wait()) {
            push(t + cfg_.hazard_tick, EventKind::edge_departure, ev.id, generation_[ev.id]);
            return;
        }
        const NodeId from = ev.node;
        const NodeId to = *decision.next;
        const auto edge = graph_.find_edge(from, to);
        if (!edge) throw std::logic_error("policy chose a non-adjacent hop");
        const double length = graph_.edge(*edge).length;

        ev.distance += length;
        if (ev.previous) ev.turning += turn_angle_deg(graph_, *ev.previous, from, to);
        update_energy(ev);
        const auto& route = ev.assigned_route;
        if (ev.route_pos + 1 < route.size() && route[ev.route_pos] == from && route[ev.route_pos + 1] == to) {
            ++ev.route_pos;
        } else {
            ev.assigned_route.clear();
            ev.route_pos = 0;
        }
        ++ev.hops_since_switch;

        ev.heading = to;
        ev.state = EvacueeState::moving;
        leave(from, t);
        push(t + length / ev.speed, EventKind::node_arrival, ev.id, generation_[ev.id]);
    }

    void on_arrival(Evacuee& ev, double t) {
        settle(ev, t);
        if (ev.state == EvacueeState::dead) return;
        ev.previous = ev.node;
        ev.node = *ev.heading;
        ev.heading.reset();
        ev.trajectory.push_back(ev.node);
        if (graph_.is_exit(ev.node)) {
            ev.state = EvacueeState::evacuated;
            ev.evacuation_time = t - t0_;
            ++generation_[ev.id];
            --inside_;
            return;
        }

        auto& stats = stats_[ev.node];
        stats.record_arrival(stats.seen_arrival ? std::max(t, stats.last_arrival + cfg_.arrival_resolution) : t);
        const auto arrival = occupancy_[ev.node].arrive(ev.id);
        if (arrival.admitted) {
            ev.state = EvacueeState::moving;
            push(t + cfg_.service_time, EventKind::edge_departure, ev.id, generation_[ev.id]);
        } else {
            ev.state = EvacueeState::queued;
            ++congestion_;
            ++ev.brakes;
            update_energy(ev);
        }
        note_queue(ev.node);
    }

    HopDecision decide(Evacuee& ev, double t) {
        switch (cfg_.policy) {
            case Policy::autonomous: return policy_autonomous(ev, view_);
            case Policy::dijkstra:
                refresh_global_field();
                return policy_dijkstra(ev, view_, global_field_, fallback_field_);
            case Policy::cpn: {
                const auto goal = cfg_.goal_for(ev.category);
                network_->best_route(ev.node, goal, t);
                return policy_cpn(ev, network_->state(ev.node, goal).table, view_);
            }
        }
        return {};
    }

    // Frees `node`'s slot and starts serving whoever waited for it.
    void leave(NodeId node, double t) {
        if (const auto next = occupancy_[node].release()) {
            auto& waiter = evacuees_[*next];
            waiter.state = EvacueeState::moving;
            push(t + cfg_.service_time, EventKind::edge_departure, waiter.id, generation_[waiter.id]);
            settle(waiter, t);
        }
        note_queue(node);
    }

    void settle(Evacuee& ev, double t) {
        if (ev.state == EvacueeState::evacuated || ev.state == EvacueeState::dead) return;
        if (t <= ev.settled_at) return;
        double t_hr = arrival_[ev.node];
        if (ev.heading) t_hr = std::min(t_hr, arrival_[*ev.heading]);
        const double dose = exposure(t_hr, ev.settled_at, t, cfg_.hazard);
        ev.settled_at = t;
        const auto before = ev.state;
        apply_exposure(ev, dose, cfg_.damage_rate, cfg_.params(ev.category).damage_multiplier);
        if (ev.state != EvacueeState::dead) return;

        ++generation_[ev.id];
        --inside_;
        if (ev.heading) return;
        if (before == EvacueeState::queued) {
            occupancy_[ev.node].remove_waiting(ev.id);
            note_queue(ev.node);
        } else {
            leave(ev.node, t);
        }
    }

    void update_energy(Evacuee& ev) const {
        const auto& p = cfg_.goal_params.energy;
        ev.energy_used = p.per_brake * ev.brakes + p.per_cm * ev.distance + p.per_degree * ev.turning;
    }

    void note_queue(NodeId n) {
        const int waiting = static_cast<int>(occupancy_[n].waiting().size());
        stats_[n].current_queue = waiting;
        sensors_[n].queue = waiting;
        node_metrics_[n].peak_queue = std::max(node_metrics_[n].peak_queue, waiting);
    }

    TrialMetrics summarize(bool truncated) const {
        TrialMetrics m;
        m.seed = seed_;
        m.policy = cfg_.policy;
        m.evacuees = static_cast<int>(evacuees_.size());
        m.congestion = congestion_;
        m.truncated = truncated;
        int survivors = 0;
        double time_sum = 0.0;
        double health_sum = 0.0;
        for (const auto& ev : evacuees_) {
            if (ev.state == EvacueeState::evacuated) {
                ++survivors;
                time_sum += ev.evacuation_time;
            }
            if (ev.state == EvacueeState::dead) ++m.deaths;
            health_sum += ev.health;
            m.total_energy += ev.energy_used;
        }
        if (!evacuees_.empty()) {
            m.survivor_fraction = static_cast<double>(survivors) / static_cast<double>(evacuees_.size());
            m.avg_health = health_sum / static_cast<double>(evacuees_.size());
        }
        if (survivors > 0) m.avg_evacuation_time = time_sum / survivors;
        return m;
    }

    const ScenarioConfig& cfg_;
    const BuildingGraph& graph_;
    std::uint64_t seed_;
    const TrialOptions& options_;
    double t0_;
    std::vector<double> arrival_;
    HazardView view_;
    std::vector<double> length_field_;
    std::vector<double> global_field_;
    std::vector<double> fallback_field_;
    std::size_t hazard_signature_ = 0;

    std::vector<Evacuee> evacuees_;
    std::vector<std::uint32_t> generation_;
    std::vector<NodeOccupancy> occupancy_;
    std::vector<NodeQueueStats> stats_;
    std::vector<NodeSample> sensors_;
    std::vector<NodeMetrics> node_metrics_;
    int inside_ = 0;
    int congestion_ = 0;

    std::optional<CpnNetwork> network_;
    Rng cpn_rng_;
    std::map<std::uint64_t, Ack> pending_acks_;
    std::uint64_t next_ack_ = 0;

    std::priority_queue<Event, std::vector<Event>, RunsLater> queue_;
    std::uint64_t next_seq_ = 0;
};

}  // namespace

TrialResult run_trial(const ScenarioConfig& config, std::uint64_t seed, const TrialOptions& options) {
    if (!config.building) throw ConfigError("scenario has no building loaded");
    Trial trial(config, seed, options);
    return trial.run();
}

}  // namespace evac
