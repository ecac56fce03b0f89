#include "evac/building.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>

#include "evac/text.hpp"

namespace evac {

namespace {

std::string node_label(NodeId id) { return std::to_string(id); }

}  // namespace

BuildingGraph::BuildingGraph(std::string name, std::vector<BuildingNode> nodes, std::vector<Edge> edges)
    : name_(std::move(name)), nodes_(std::move(nodes)), edges_(std::move(edges)) {
    const auto n = nodes_.size();
    if (n == 0) throw ValidationError("building has no nodes");

    std::sort(nodes_.begin(), nodes_.end(), [](const auto& l, const auto& r) { return l.id < r.id; });
    for (std::size_t i = 0; i < n; ++i) {
        const auto& node = nodes_[i];
        if (node.id != i) {
            throw ValidationError("node ids must be dense 0.." + std::to_string(n - 1) + ", missing or duplicate id " +
                                  std::to_string(i));
        }
        if (node.capacity < 1) throw ValidationError("capacity < 1 at node " + node_label(node.id));
        if (node.floor < 1) throw ValidationError("floor < 1 at node " + node_label(node.id));
        if (node.is_exit) exits_.push_back(node.id);
    }
    if (exits_.empty()) throw ValidationError("no exit declared");

    // Each floor must occupy its own z-band, ordered with the floor number.
    std::map<int, std::pair<double, double>> z_band;
    for (const auto& node : nodes_) {
        auto [it, inserted] = z_band.try_emplace(node.floor, node.position.z, node.position.z);
        if (!inserted) {
            it->second.first = std::min(it->second.first, node.position.z);
            it->second.second = std::max(it->second.second, node.position.z);
        }
    }
    for (auto it = z_band.begin(); std::next(it) != z_band.end(); ++it) {
        auto next = std::next(it);
        if (it->second.second >= next->second.first) {
            throw ValidationError("floor " + std::to_string(it->first) + " overlaps the z-band of floor " +
                                  std::to_string(next->first));
        }
    }

    adjacency_.assign(n, {});
    for (EdgeId e = 0; e < edges_.size(); ++e) {
        const auto& edge = edges_[e];
        if (edge.a >= n || edge.b >= n) {
            throw ValidationError("edge references unknown node " + node_label(std::max(edge.a, edge.b)));
        }
        if (edge.a == edge.b) throw ValidationError("self-edge at node " + node_label(edge.a));
        if (!(edge.length > 0.0) || !std::isfinite(edge.length)) {
            throw ValidationError("non-positive edge length between " + node_label(edge.a) + " and " +
                                  node_label(edge.b));
        }
        for (const auto& nb : adjacency_[edge.a]) {
            if (nb.node == edge.b) {
                throw ValidationError("duplicate edge " + node_label(edge.a) + "-" + node_label(edge.b));
            }
        }
        adjacency_[edge.a].push_back({edge.b, e});
        adjacency_[edge.b].push_back({edge.a, e});
    }
    for (auto& list : adjacency_) {
        std::sort(list.begin(), list.end(), [](const auto& l, const auto& r) { return l.node < r.node; });
    }

    const auto to_exit = distances_to_exits(*this, length_weight());
    for (NodeId id = 0; id < n; ++id) {
        if (!std::isfinite(to_exit[id])) throw ValidationError("exit unreachable from " + node_label(id));
    }
}

std::optional<EdgeId> BuildingGraph::find_edge(NodeId a, NodeId b) const {
    if (a >= adjacency_.size()) return std::nullopt;
    for (const auto& nb : adjacency_[a]) {
        if (nb.node == b) return nb.edge;
    }
    return std::nullopt;
}

double BuildingGraph::average_edge_length() const {
    if (edges_.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& e : edges_) sum += e.length;
    return sum / static_cast<double>(edges_.size());
}

double BuildingGraph::max_edge_length() const {
    double best = 0.0;
    for (const auto& e : edges_) best = std::max(best, e.length);
    return best;
}

bool BuildingGraph::operator==(const BuildingGraph& other) const {
    if (name_ != other.name_ || nodes_.size() != other.nodes_.size() || edges_.size() != other.edges_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& l = nodes_[i];
        const auto& r = other.nodes_[i];
        if (l.id != r.id || l.position.x != r.position.x || l.position.y != r.position.y ||
            l.position.z != r.position.z || l.floor != r.floor || l.capacity != r.capacity || l.is_exit != r.is_exit) {
            return false;
        }
    }
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const auto& l = edges_[i];
        const auto& r = other.edges_[i];
        if (l.a != r.a || l.b != r.b || l.length != r.length) return false;
    }
    return true;
}

BuildingGraph load_building(std::string_view text) {
    std::string name;
    bool have_header = false;
    std::vector<BuildingNode> nodes;
    std::vector<Edge> edges;

    std::size_t line_no = 0;
    for (const auto& raw : split_lines(text)) {
        ++line_no;
        const auto tokens = tokenize(strip_comment(raw));
        if (tokens.empty()) continue;
        const auto& kind = tokens[0];
        try {
            if (kind == "building") {
                if (have_header) throw std::invalid_argument("duplicate building header");
                if (tokens.size() != 2) throw std::invalid_argument("expected `building <name>`");
                name = tokens[1];
                have_header = true;
            } else if (kind == "node") {
                if (tokens.size() != 7 && tokens.size() != 8) {
                    throw std::invalid_argument("expected `node <id> <x> <y> <z> <floor> <capacity> [exit]`");
                }
                BuildingNode node;
                node.id = parse_number<NodeId>(tokens[1]);
                node.position = {parse_number<double>(tokens[2]), parse_number<double>(tokens[3]),
                                 parse_number<double>(tokens[4])};
                node.floor = parse_number<int>(tokens[5]);
                node.capacity = parse_number<int>(tokens[6]);
                if (tokens.size() == 8) {
                    if (tokens[7] != "exit") throw std::invalid_argument("unknown node flag `" + tokens[7] + "`");
                    node.is_exit = true;
                }
                nodes.push_back(node);
            } else if (kind == "edge") {
                if (tokens.size() != 4) throw std::invalid_argument("expected `edge <id1> <id2> <length_cm>`");
                edges.push_back({parse_number<NodeId>(tokens[1]), parse_number<NodeId>(tokens[2]),
                                 parse_number<double>(tokens[3])});
            } else {
                throw std::invalid_argument("unknown record `" + kind + "`");
            }
        } catch (const std::invalid_argument& e) {
            throw ParseError(line_no, e.what());
        }
        if (kind != "building" && !have_header) throw ParseError(line_no, "missing `building <name>` header");
    }
    if (!have_header) throw ParseError(line_no, "missing `building <name>` header");
    return BuildingGraph(std::move(name), std::move(nodes), std::move(edges));
}

BuildingGraph load_building_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BuildingError("cannot open building file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return load_building(buffer.str());
}

std::string serialize_building(const BuildingGraph& graph) {
    std::string out = "building " + graph.name() + "\n";
    for (const auto& node : graph.nodes()) {
        out += "node " + std::to_string(node.id) + ' ' + format_double(node.position.x) + ' ' +
               format_double(node.position.y) + ' ' + format_double(node.position.z) + ' ' +
               std::to_string(node.floor) + ' ' + std::to_string(node.capacity);
        if (node.is_exit) out += " exit";
        out += '\n';
    }
    for (const auto& edge : graph.edges()) {
        out += "edge " + std::to_string(edge.a) + ' ' + std::to_string(edge.b) + ' ' + format_double(edge.length) +
               '\n';
    }
    return out;
}

EdgeWeight length_weight() {
    return [](const Edge& e, EdgeId) { return e.length; };
}

namespace {

using QueueEntry = std::pair<double, NodeId>;

std::vector<double> run_dijkstra(const BuildingGraph& graph, std::span<const NodeId> sources,
                                 const EdgeWeight& weight) {
    std::vector<double> dist(graph.node_count(), kInfinity);
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;
    for (auto s : sources) {
        dist.at(s) = 0.0;
        open.emplace(0.0, s);
    }
    while (!open.empty()) {
        auto [d, v] = open.top();
        open.pop();
        if (d > dist[v]) continue;
        for (const auto& nb : graph.neighbors(v)) {
            const double w = weight(graph.edge(nb.edge), nb.edge);
            if (!(w < kInfinity)) continue;
            const double candidate = d + w;
            if (candidate < dist[nb.node]) {
                dist[nb.node] = candidate;
                open.emplace(candidate, nb.node);
            }
        }
    }
    return dist;
}

}  // namespace

std::vector<double> shortest_distances(const BuildingGraph& graph, NodeId source, const EdgeWeight& weight) {
    const NodeId sources[] = {source};
    return run_dijkstra(graph, sources, weight);
}

std::vector<double> distances_to_exits(const BuildingGraph& graph, const EdgeWeight& weight) {
    return run_dijkstra(graph, graph.exits(), weight);
}

std::optional<NodeId> next_hop_towards_exit(const BuildingGraph& graph, std::span<const double> to_exit,
                                            NodeId from, const EdgeWeight& weight) {
    if (graph.is_exit(from) || !std::isfinite(to_exit[from])) return std::nullopt;
    double best = kInfinity;
    std::vector<std::pair<NodeId, double>> candidates;
    for (const auto& nb : graph.neighbors(from)) {
        const double w = weight(graph.edge(nb.edge), nb.edge);
        if (!(w < kInfinity) || !std::isfinite(to_exit[nb.node])) continue;
        const double cost = w + to_exit[nb.node];
        candidates.emplace_back(nb.node, cost);
        best = std::min(best, cost);
    }
    if (!std::isfinite(best)) return std::nullopt;
    const double slack = 1e-9 * std::max(1.0, std::abs(best));
    // Neighbors are sorted by id, so the first match is the smallest id.
    for (const auto& [node, cost] : candidates) {
        if (cost <= best + slack) return node;
    }
    return std::nullopt;
}

ExitRoute route_from_field(const BuildingGraph& graph, std::span<const double> to_exit, NodeId source,
                           const EdgeWeight& weight) {
    ExitRoute route;
    if (!std::isfinite(to_exit[source])) {
        route.trapped = true;
        return route;
    }
    route.path.push_back(source);
    NodeId at = source;
    while (!graph.is_exit(at)) {
        auto next = next_hop_towards_exit(graph, to_exit, at, weight);
        if (!next || route.path.size() > graph.node_count()) {
            throw std::logic_error("cost field does not lead to an exit from node " + std::to_string(source));
        }
        route.cost += weight(graph.edge(*graph.find_edge(at, *next)), *graph.find_edge(at, *next));
        at = *next;
        route.path.push_back(at);
    }
    return route;
}

ExitRoute dijkstra(const BuildingGraph& graph, NodeId source, const EdgeWeight& weight) {
    if (source >= graph.node_count()) throw BuildingError("unknown node " + std::to_string(source));
    const auto field = distances_to_exits(graph, weight);
    return route_from_field(graph, field, source, weight);
}

double path_length(const BuildingGraph& graph, std::span<const NodeId> path) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        auto e = graph.find_edge(path[i], path[i + 1]);
        if (!e) {
            throw BuildingError("path step " + std::to_string(path[i]) + " -> " + std::to_string(path[i + 1]) +
                                " is not an edge");
        }
        total += graph.edge(*e).length;
    }
    return total;
}

bool is_valid_path(const BuildingGraph& graph, std::span<const NodeId> path) {
    if (path.empty()) return false;
    for (auto n : path) {
        if (n >= graph.node_count()) return false;
    }
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (!graph.adjacent(path[i], path[i + 1])) return false;
    }
    return true;
}

}  // namespace evac
