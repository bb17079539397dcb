#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "roadsage/geometry.hpp"

namespace roadsage {

struct RoadNode {
    std::string id;
    double x = 0.0;
    double y = 0.0;
};

struct RoadEdge {
    std::string id;
    std::string u;  // tail node id (directed u -> v)
    std::string v;  // head node id
    Polyline geometry;
    double length_m = 0.0;
    double bearing_deg = 0.0;
    double travel_time_s = 0.0;
    double throughput_vpd = 0.0;
    bool oneway = false;
    bool bridge = false;
    bool tunnel = false;
    std::optional<std::string> highway;  // road-type label, absent when unknown
    std::string parent_id;               // originating edge before segmentation
    bool has_travel_time = true;         // false when the source record was null
    bool has_throughput = true;
};

// Primal road graph: intersections as nodes, directed attributed road
// segments as edges. Immutable after construction; construction validates
// referential integrity, id uniqueness and geometry consistency.
class RoadGraph {
public:
    RoadGraph() = default;
    RoadGraph(std::vector<RoadNode> nodes, std::vector<RoadEdge> edges);

    const std::vector<RoadNode>& nodes() const { return nodes_; }
    const std::vector<RoadEdge>& edges() const { return edges_; }

    bool has_node(const std::string& id) const { return node_index_.count(id) > 0; }
    bool has_edge(const std::string& id) const { return edge_index_.count(id) > 0; }
    const RoadNode& node(const std::string& id) const;
    const RoadEdge& edge(const std::string& id) const;
    int node_index(const std::string& id) const;
    int edge_index(const std::string& id) const;

private:
    void validate() const;

    std::vector<RoadNode> nodes_;
    std::vector<RoadEdge> edges_;
    std::unordered_map<std::string, int> node_index_;
    std::unordered_map<std::string, int> edge_index_;
};

// Reads the JSON-lines graph format: one object per line, "kind" is "node"
// or "edge". Null bearing is computed from the geometry; null parent_id
// defaults to the edge's own id; null travel_time_s / throughput_vpd map to
// 0 with the presence flag cleared.
RoadGraph load_graph(const std::string& path);

void save_graph(const RoadGraph& graph, const std::string& path);

// Road segments as nodes, allowed continuations as edges: a dual edge
// (e_i, e_j) exists iff head(e_i) = tail(e_j) in the primal graph. Node
// order is the primal edge ids sorted lexicographically.
class DualGraph {
public:
    DualGraph() = default;

    const std::vector<std::string>& node_ids() const { return node_ids_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<std::vector<int>>& out_neighbors() const { return out_; }
    const std::vector<std::vector<int>>& in_neighbors() const { return in_; }
    // Union of in- and out-neighbors, sorted, deduplicated. The neighborhood
    // the aggregation layers consume.
    const std::vector<std::vector<int>>& neighbors() const { return nbr_; }

    int size() const { return static_cast<int>(node_ids_.size()); }
    int index_of(const std::string& edge_id) const;

    friend DualGraph to_dual(const RoadGraph& g);

private:
    std::vector<std::string> node_ids_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> out_;
    std::vector<std::vector<int>> in_;
    std::vector<std::vector<int>> nbr_;
    std::unordered_map<std::string, int> index_;
};

DualGraph to_dual(const RoadGraph& g);

}  // namespace roadsage
