#include "roadsage/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "roadsage/errors.hpp"

namespace roadsage {

using nlohmann::json;

namespace {

constexpr double kEndpointTolM = 1e-6;
constexpr double kLengthRelTol = 1e-6;

double num_field(const json& j, const char* key, int line_no) {
    if (!j.contains(key) || !j[key].is_number())
        throw DataError("line " + std::to_string(line_no) + ": missing numeric field '" + key +
                        "'");
    return j[key].get<double>();
}

bool bool_field(const json& j, const char* key, int line_no) {
    if (!j.contains(key) || !j[key].is_boolean())
        throw DataError("line " + std::to_string(line_no) + ": missing boolean field '" + key +
                        "'");
    return j[key].get<bool>();
}

std::string str_field(const json& j, const char* key, int line_no) {
    if (!j.contains(key) || !j[key].is_string())
        throw DataError("line " + std::to_string(line_no) + ": missing string field '" + key +
                        "'");
    return j[key].get<std::string>();
}

}  // namespace

RoadGraph::RoadGraph(std::vector<RoadNode> nodes, std::vector<RoadEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    node_index_.reserve(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!node_index_.emplace(nodes_[i].id, static_cast<int>(i)).second)
            throw DataError("duplicate node id: " + nodes_[i].id);
    }
    edge_index_.reserve(edges_.size());
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        if (!edge_index_.emplace(edges_[i].id, static_cast<int>(i)).second)
            throw DataError("duplicate edge id: " + edges_[i].id);
    }
    validate();
}

const RoadNode& RoadGraph::node(const std::string& id) const {
    const auto it = node_index_.find(id);
    if (it == node_index_.end()) throw DataError("unknown node id: " + id);
    return nodes_[static_cast<std::size_t>(it->second)];
}

const RoadEdge& RoadGraph::edge(const std::string& id) const {
    const auto it = edge_index_.find(id);
    if (it == edge_index_.end()) throw DataError("unknown edge id: " + id);
    return edges_[static_cast<std::size_t>(it->second)];
}

int RoadGraph::node_index(const std::string& id) const {
    const auto it = node_index_.find(id);
    return it == node_index_.end() ? -1 : it->second;
}

int RoadGraph::edge_index(const std::string& id) const {
    const auto it = edge_index_.find(id);
    return it == edge_index_.end() ? -1 : it->second;
}

void RoadGraph::validate() const {
    for (const RoadNode& n : nodes_) {
        if (!std::isfinite(n.x) || !std::isfinite(n.y))
            throw DataError("node " + n.id + ": non-finite coordinates");
    }
    for (const RoadEdge& e : edges_) {
        const auto u_it = node_index_.find(e.u);
        if (u_it == node_index_.end())
            throw DataError("edge " + e.id + " references missing node " + e.u);
        const auto v_it = node_index_.find(e.v);
        if (v_it == node_index_.end())
            throw DataError("edge " + e.id + " references missing node " + e.v);
        if (e.geometry.size() < 2) throw DataError("edge " + e.id + ": geometry needs >= 2 points");
        const RoadNode& u = nodes_[static_cast<std::size_t>(u_it->second)];
        const RoadNode& v = nodes_[static_cast<std::size_t>(v_it->second)];
        const Point& first = e.geometry.front();
        const Point& last = e.geometry.back();
        if (std::hypot(first.x - u.x, first.y - u.y) > kEndpointTolM)
            throw DataError("edge " + e.id + ": geometry start does not match node " + e.u);
        if (std::hypot(last.x - v.x, last.y - v.y) > kEndpointTolM)
            throw DataError("edge " + e.id + ": geometry end does not match node " + e.v);
        const double arc = polyline_length(e.geometry);
        const double scale = std::max(1.0, std::abs(arc));
        if (std::abs(arc - e.length_m) > kLengthRelTol * scale)
            throw DataError("edge " + e.id + ": length_m " + std::to_string(e.length_m) +
                            " does not match geometry arc length " + std::to_string(arc));
        if (!(e.travel_time_s >= 0.0))
            throw DataError("edge " + e.id + ": negative travel_time_s");
        if (!(e.throughput_vpd >= 0.0))
            throw DataError("edge " + e.id + ": negative throughput_vpd");
        if (!std::isfinite(e.bearing_deg) || e.bearing_deg < 0.0 || e.bearing_deg >= 360.0)
            throw DataError("edge " + e.id + ": bearing_deg outside [0,360)");
    }
}

RoadGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open graph file: " + path);

    std::vector<RoadNode> nodes;
    std::vector<RoadEdge> edges;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw DataError("line " + std::to_string(line_no) + ": malformed record");
        const std::string kind = str_field(j, "kind", line_no);
        if (kind == "node") {
            RoadNode n;
            n.id = str_field(j, "id", line_no);
            n.x = num_field(j, "x", line_no);
            n.y = num_field(j, "y", line_no);
            nodes.push_back(std::move(n));
        } else if (kind == "edge") {
            RoadEdge e;
            e.id = str_field(j, "id", line_no);
            e.u = str_field(j, "u", line_no);
            e.v = str_field(j, "v", line_no);
            if (!j.contains("geometry") || !j["geometry"].is_array() || j["geometry"].size() < 2)
                throw DataError("line " + std::to_string(line_no) + ": bad geometry");
            for (const auto& p : j["geometry"]) {
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                    throw DataError("line " + std::to_string(line_no) + ": bad geometry point");
                e.geometry.push_back({p[0].get<double>(), p[1].get<double>()});
            }
            e.length_m = num_field(j, "length_m", line_no);
            if (j.contains("bearing_deg") && j["bearing_deg"].is_number()) {
                e.bearing_deg = j["bearing_deg"].get<double>();
            } else {
                e.bearing_deg = edge_bearing(e.geometry);
            }
            if (j.contains("travel_time_s") && j["travel_time_s"].is_null()) {
                e.travel_time_s = 0.0;
                e.has_travel_time = false;
            } else {
                e.travel_time_s = num_field(j, "travel_time_s", line_no);
            }
            if (j.contains("throughput_vpd") && j["throughput_vpd"].is_null()) {
                e.throughput_vpd = 0.0;
                e.has_throughput = false;
            } else {
                e.throughput_vpd = num_field(j, "throughput_vpd", line_no);
            }
            e.oneway = bool_field(j, "oneway", line_no);
            e.bridge = bool_field(j, "bridge", line_no);
            e.tunnel = bool_field(j, "tunnel", line_no);
            if (j.contains("highway") && j["highway"].is_string())
                e.highway = j["highway"].get<std::string>();
            if (j.contains("parent_id") && j["parent_id"].is_string()) {
                e.parent_id = j["parent_id"].get<std::string>();
            } else {
                e.parent_id = e.id;
            }
            edges.push_back(std::move(e));
        } else {
            throw DataError("line " + std::to_string(line_no) + ": unknown kind '" + kind + "'");
        }
    }
    return RoadGraph(std::move(nodes), std::move(edges));
}

void save_graph(const RoadGraph& graph, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write graph file: " + path);
    for (const RoadNode& n : graph.nodes()) {
        json j{{"kind", "node"}, {"id", n.id}, {"x", n.x}, {"y", n.y}};
        out << j.dump() << "\n";
    }
    for (const RoadEdge& e : graph.edges()) {
        json geom = json::array();
        for (const Point& p : e.geometry) geom.push_back(json::array({p.x, p.y}));
        json j{{"kind", "edge"},
               {"id", e.id},
               {"u", e.u},
               {"v", e.v},
               {"geometry", std::move(geom)},
               {"length_m", e.length_m},
               {"bearing_deg", e.bearing_deg},
               {"travel_time_s", e.has_travel_time ? json(e.travel_time_s) : json(nullptr)},
               {"throughput_vpd", e.has_throughput ? json(e.throughput_vpd) : json(nullptr)},
               {"oneway", e.oneway},
               {"bridge", e.bridge},
               {"tunnel", e.tunnel},
               {"highway", e.highway ? json(*e.highway) : json(nullptr)},
               {"parent_id", e.parent_id}};
        out << j.dump() << "\n";
    }
    if (!out) throw DataError("write failed: " + path);
}

int DualGraph::index_of(const std::string& edge_id) const {
    const auto it = index_.find(edge_id);
    return it == index_.end() ? -1 : it->second;
}

DualGraph to_dual(const RoadGraph& g) {
    DualGraph d;
    d.node_ids_.reserve(g.edges().size());
    for (const RoadEdge& e : g.edges()) d.node_ids_.push_back(e.id);
    std::sort(d.node_ids_.begin(), d.node_ids_.end());
    for (std::size_t i = 0; i < d.node_ids_.size(); ++i)
        d.index_.emplace(d.node_ids_[i], static_cast<int>(i));

    const int n = d.size();
    // tails[node id] = dual indices of edges leaving that primal node.
    std::map<std::string, std::vector<int>> tails;
    for (int i = 0; i < n; ++i) tails[g.edge(d.node_ids_[static_cast<std::size_t>(i)]).u].push_back(i);

    d.out_.assign(static_cast<std::size_t>(n), {});
    d.in_.assign(static_cast<std::size_t>(n), {});
    for (int i = 0; i < n; ++i) {
        const RoadEdge& e = g.edge(d.node_ids_[static_cast<std::size_t>(i)]);
        const auto it = tails.find(e.v);
        if (it == tails.end()) continue;
        for (const int j : it->second) {
            d.edges_.emplace_back(i, j);
            d.out_[static_cast<std::size_t>(i)].push_back(j);
            d.in_[static_cast<std::size_t>(j)].push_back(i);
        }
    }
    d.nbr_.assign(static_cast<std::size_t>(n), {});
    for (int i = 0; i < n; ++i) {
        auto& u = d.nbr_[static_cast<std::size_t>(i)];
        u = d.out_[static_cast<std::size_t>(i)];
        u.insert(u.end(), d.in_[static_cast<std::size_t>(i)].begin(),
                 d.in_[static_cast<std::size_t>(i)].end());
        std::sort(u.begin(), u.end());
        u.erase(std::unique(u.begin(), u.end()), u.end());
    }
    return d;
}

}  // namespace roadsage
