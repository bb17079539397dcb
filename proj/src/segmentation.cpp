#include "roadsage/segmentation.hpp"

#include <cmath>
#include <string>

#include "roadsage/errors.hpp"

namespace roadsage {

namespace {

double attr_value(const RoadEdge& e, SegmentAttr attr) {
    switch (attr) {
        case SegmentAttr::travel_time_s: return e.travel_time_s;
        case SegmentAttr::length_m: return e.length_m;
    }
    throw ConfigError("unknown segmentation attribute");
}

}  // namespace

RoadGraph segment_by_attribute(const RoadGraph& g, SegmentAttr attr, double target) {
    if (!(target > 0.0)) throw ConfigError("segmentation target must be positive");

    std::vector<RoadNode> nodes = g.nodes();  // endpoint nodes are retained
    std::vector<RoadEdge> edges;
    edges.reserve(g.edges().size());

    for (const RoadEdge& parent : g.edges()) {
        const double a = attr_value(parent, attr);
        if (!std::isfinite(a) || a < 0.0)
            throw DataError("edge " + parent.id + ": attribute value must be finite and >= 0");
        // a == 0 would give n = 0; the edge is kept instead of deleted.
        const long n = std::max<long>(1, static_cast<long>(std::ceil(a / target)));
        if (n <= 1) {
            edges.push_back(parent);
            continue;
        }

        // Interstitial nodes at arc-length fractions i/n, children between
        // consecutive fractions. Each split point is computed from the total
        // arc length, so rounding does not accumulate across children.
        std::vector<std::string> chain_nodes;
        chain_nodes.push_back(parent.u);
        for (long i = 1; i < n; ++i) {
            const Point p =
                point_at_fraction(parent.geometry, static_cast<double>(i) / static_cast<double>(n));
            RoadNode node;
            node.id = parent.id + "@" + std::to_string(i);
            node.x = p.x;
            node.y = p.y;
            nodes.push_back(node);
            chain_nodes.push_back(node.id);
        }
        chain_nodes.push_back(parent.v);

        for (long i = 0; i < n; ++i) {
            RoadEdge child = parent;
            child.id = parent.id + "#" + std::to_string(i + 1);
            child.u = chain_nodes[static_cast<std::size_t>(i)];
            child.v = chain_nodes[static_cast<std::size_t>(i + 1)];
            child.geometry =
                slice_polyline(parent.geometry, static_cast<double>(i) / static_cast<double>(n),
                               static_cast<double>(i + 1) / static_cast<double>(n));
            child.length_m = parent.length_m / static_cast<double>(n);
            child.travel_time_s = parent.travel_time_s / static_cast<double>(n);
            child.parent_id = parent.parent_id;
            const Point& first = child.geometry.front();
            const Point& last = child.geometry.back();
            if (std::hypot(last.x - first.x, last.y - first.y) > 1e-12) {
                child.bearing_deg = edge_bearing(child.geometry);
            }
            // else: closed child (loop geometry); the parent bearing stays.
            edges.push_back(std::move(child));
        }
    }
    return RoadGraph(std::move(nodes), std::move(edges));
}

RoadGraph segment_pipeline(const RoadGraph& g, const SegmentationConfig& cfg) {
    if (!(cfg.target_traveltime_s > 0.0) || !(cfg.target_length_m > 0.0))
        throw ConfigError("segmentation targets must be positive");
    const RoadGraph by_time = segment_by_attribute(g, SegmentAttr::travel_time_s,
                                                   cfg.target_traveltime_s);
    return segment_by_attribute(by_time, SegmentAttr::length_m, cfg.target_length_m);
}

}  // namespace roadsage
