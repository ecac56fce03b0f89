#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace evac {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Position {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

struct BuildingNode {
    NodeId id = 0;
    Position position;  // cm
    int floor = 1;
    int capacity = 1;   // simultaneous occupants
    bool is_exit = false;
};

struct Edge {
    NodeId a = 0;
    NodeId b = 0;
    double length = 0.0;  // cm

    NodeId other(NodeId n) const { return n == a ? b : a; }
};

struct Neighbor {
    NodeId node;
    EdgeId edge;
};

/// Ordered node sequence; consecutive entries must be adjacent.
using Path = std::vector<NodeId>;

class BuildingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parse failure, carries the 1-based line number of the offending line.
class ParseError : public BuildingError {
public:
    ParseError(std::size_t line, const std::string& what)
        : BuildingError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public BuildingError {
public:
    using BuildingError::BuildingError;
};

/// Multi-floor undirected building graph. Immutable once built.
class BuildingGraph {
public:
    BuildingGraph() = default;

    /// Validates every invariant and throws ValidationError naming the first violation.
    BuildingGraph(std::string name, std::vector<BuildingNode> nodes, std::vector<Edge> edges);

    const std::string& name() const { return name_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    const BuildingNode& node(NodeId id) const { return nodes_.at(id); }
    const std::vector<BuildingNode>& nodes() const { return nodes_; }
    const Edge& edge(EdgeId id) const { return edges_.at(id); }
    const std::vector<Edge>& edges() const { return edges_; }

    /// Neighbors sorted by node id.
    std::span<const Neighbor> neighbors(NodeId id) const { return adjacency_.at(id); }
    std::size_t degree(NodeId id) const { return adjacency_.at(id).size(); }

    std::optional<EdgeId> find_edge(NodeId a, NodeId b) const;
    bool adjacent(NodeId a, NodeId b) const { return find_edge(a, b).has_value(); }

    const std::vector<NodeId>& exits() const { return exits_; }
    bool is_exit(NodeId id) const { return nodes_.at(id).is_exit; }

    double average_edge_length() const;
    double max_edge_length() const;

    bool operator==(const BuildingGraph& other) const;

private:
    std::string name_;
    std::vector<BuildingNode> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::vector<Neighbor>> adjacency_;
    std::vector<NodeId> exits_;
};

/// Parses the line-oriented building format:
///   building <name>
///   node <id> <x> <y> <z> <floor> <capacity> [exit]
///   edge <id1> <id2> <length_cm>
/// `#` starts a comment.
BuildingGraph load_building(std::string_view text);
BuildingGraph load_building_file(const std::string& path);

/// Inverse of load_building; round-trips exactly.
std::string serialize_building(const BuildingGraph& graph);

/// Per-edge cost. Return kInfinity to treat the edge as removed.
using EdgeWeight = std::function<double(const Edge&, EdgeId)>;

/// Weight equal to physical edge length.
EdgeWeight length_weight();

/// Single-source shortest distances to every node (kInfinity if unreachable).
std::vector<double> shortest_distances(const BuildingGraph& graph, NodeId source, const EdgeWeight& weight);

/// Cost-to-nearest-exit for every node, via a virtual super-sink joined to all exits
/// with zero-cost edges.
std::vector<double> distances_to_exits(const BuildingGraph& graph, const EdgeWeight& weight);

struct ExitRoute {
    bool trapped = false;  // no exit reachable with finite cost
    Path path;             // source ... exit; empty if trapped
    double cost = 0.0;
};

/// Next hop towards the cheapest exit given a cost-to-exit field. Ties go to the smaller
/// node id. Returns nullopt when `from` is an exit or no finite route exists.
std::optional<NodeId> next_hop_towards_exit(const BuildingGraph& graph, std::span<const double> to_exit,
                                            NodeId from, const EdgeWeight& weight);

/// Follows next_hop_towards_exit from `source` to an exit.
ExitRoute route_from_field(const BuildingGraph& graph, std::span<const double> to_exit, NodeId source,
                           const EdgeWeight& weight);

/// Minimum-cost path from `source` to the cheapest-to-reach exit.
ExitRoute dijkstra(const BuildingGraph& graph, NodeId source, const EdgeWeight& weight);

/// Sum of edge lengths along the path. Throws BuildingError on non-adjacent steps.
double path_length(const BuildingGraph& graph, std::span<const NodeId> path);

bool is_valid_path(const BuildingGraph& graph, std::span<const NodeId> path);

}  // namespace evac
