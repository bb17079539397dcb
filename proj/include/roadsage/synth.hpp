#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "roadsage/graph.hpp"
#include "roadsage/raster.hpp"

namespace roadsage {

// Seeded generator for a grid city with planted class signal. Every
// arterial_every-th grid line is an arterial carrying the four major road
// classes; the remaining lines carry the four minor classes. Travel time and
// throughput depend on the class pair-group only, so the distinction inside
// a pair (motorway/trunk, primary/secondary, tertiary/unclassified,
// residential/living_street) lives exclusively in the painted raster
// intensities.
struct SynthConfig {
    int grid_rows = 11;
    int grid_cols = 11;
    double block_m = 150.0;
    int arterial_every = 4;
    double noise_sigma = 8.0;   // raster noise, intensity units
    double label_noise = 0.0;   // fraction of streets with shuffled labels
    double cellsize = 1.0;      // meters per pixel
    double stripe_width_m = 9.0;
    int run_blocks = 3;         // consecutive blocks sharing one class draw
    std::uint64_t seed = 1;

    void validate() const;
};

struct SynthOutput {
    RoadGraph graph;
    RasterStack rasters;                        // red, green, blue, dsm
    std::map<std::string, std::string> labels;  // edge id -> class label
};

// Guarantees that painted class intensities differ pairwise by at least
// 3 * noise_sigma; throws ConfigError otherwise.
SynthOutput generate_synthetic(const SynthConfig& cfg);

// Writes graph.jsonl, the four ASCII rasters, manifest.json and labels.json
// into out_dir.
struct SynthPaths {
    std::string graph;
    std::string manifest;
    std::string labels;
};
SynthPaths write_synthetic(const SynthOutput& out, const std::string& out_dir);

SynthConfig synth_config_from_json_file(const std::string& path);

}  // namespace roadsage
