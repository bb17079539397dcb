#pragma once

#include "roadsage/graph.hpp"

namespace roadsage {

struct SegmentationConfig {
    double target_traveltime_s = 15.0;
    double target_length_m = 120.0;
};

enum class SegmentAttr { travel_time_s, length_m };

// Splits every edge whose attribute value a exceeds the target into
// n = ceil(a / target) children chained through interstitial nodes placed at
// arc-length fractions i/n. Children carry length and travel time equal to
// the parent's value / n, recomputed bearing, copied flags and label, id
// "<parent>#<i>" (1-based) and the parent's parent_id. Edges with a <= target
// (and a = 0) are kept unchanged.
RoadGraph segment_by_attribute(const RoadGraph& g, SegmentAttr attr, double target);

// Two passes: travel time first, then length on the intermediate graph.
// Every output edge satisfies travel_time_s <= target_traveltime_s and
// length_m <= target_length_m.
RoadGraph segment_pipeline(const RoadGraph& g, const SegmentationConfig& cfg);

}  // namespace roadsage
