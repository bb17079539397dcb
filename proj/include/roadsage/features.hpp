#pragma once

#include <string>
#include <vector>

#include "roadsage/graph.hpp"
#include "roadsage/raster.hpp"

namespace roadsage {

enum class FieldKind { numeric, binary, histogram };

struct FeatureField {
    std::string name;
    int width = 1;
    FieldKind kind = FieldKind::numeric;
};

// Describes the per-segment feature vector layout. The same spec must be
// used for every edge of a dataset.
struct FeatureSpec {
    int geometry_points = 5;  // resampled points per geometry
    bool include_vision = false;
    std::vector<std::string> channels;  // histogram channels, manifest order
    int histogram_bins = 32;
    bool gps_presence_flags = false;  // append has_travel_time / has_throughput
    bool zscore_binary = true;        // z-score 0/1 fields when normalizing
    bool zscore_histograms = false;   // histogram bins are already in [0,1]
    // Dataset bounding-box center; centroids are stored relative to it, in km.
    double centroid_origin_x = 0.0;
    double centroid_origin_y = 0.0;

    std::vector<FeatureField> layout() const;
    int dimension() const;
    void validate() const;
};

struct FeatureVector {
    std::string edge_id;
    std::vector<double> values;
};

// Centers the centroid feature on the bounding box of the graph's nodes.
FeatureSpec spec_for_graph(FeatureSpec spec, const RoadGraph& g);

// Fixed concatenation order: length, bearing as (sin, cos), centroid,
// geometry offsets, oneway/bridge/tunnel, travel time, throughput,
// [gps presence flags,] then one 32-bin histogram per channel.
// `histograms` must carry one entry per spec channel when vision is on and
// must be null otherwise.
FeatureVector assemble_features(const RoadEdge& edge, const FeatureSpec& spec,
                                const std::vector<Histogram>* histograms);

// Per-dimension z-score with statistics fit on training vectors only.
// Dimensions with zero std and kinds excluded by spec flags pass through.
struct Normalizer {
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<bool> active;

    static Normalizer fit(const std::vector<const FeatureVector*>& train,
                          const FeatureSpec& spec);
    void apply(FeatureVector& fv) const;
};

// JSON-lines feature file: a header line carrying the layout, then one
// {"edge_id","values"} object per edge.
void save_features(const std::string& path, const FeatureSpec& spec,
                   const std::vector<FeatureVector>& vectors, const std::string& config_hash,
                   std::uint64_t seed);
std::pair<FeatureSpec, std::vector<FeatureVector>> load_features(const std::string& path);

}  // namespace roadsage
