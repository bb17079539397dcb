#include "roadsage/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "roadsage/errors.hpp"
#include "roadsage/experiment.hpp"
#include "roadsage/rng.hpp"
#include "roadsage/util.hpp"

namespace roadsage {

namespace {

// Class pair-groups: {motorway,trunk} {primary,secondary} {tertiary,unclassified}
// {residential,living_street}. Travel speed, throughput, the green channel and
// the surface-model height depend on the group only; the red channel carries a
// distinct intensity per class. The distinction inside a pair therefore lives
// exclusively in the red raster.
constexpr double kSpeedMps[4] = {22.2, 16.7, 11.1, 8.33};
constexpr double kThroughputVpd[4] = {18000.0, 12000.0, 7000.0, 3000.0};
constexpr double kRedIntensity[8] = {232.0, 204.0, 176.0, 148.0, 120.0, 92.0, 64.0, 36.0};
constexpr double kGreenIntensity[4] = {220.0, 172.0, 124.0, 76.0};
constexpr double kDsmHeight[4] = {48.0, 36.0, 24.0, 12.0};
constexpr double kRedBackground = 8.0;
constexpr double kGreenBackground = 8.0;
constexpr double kBlueBackground = 128.0;
constexpr double kDsmBackground = 2.0;
// Arterial lines draw from the first four classes, minor lines from the rest.
constexpr double kArterialWeights[4] = {0.05, 0.30, 0.35, 0.30};
constexpr double kMinorWeights[4] = {0.35, 0.25, 0.35, 0.05};

int group_of(int cls) { return cls / 2; }

struct Street {
    std::string id;
    std::string line_key;  // grid line the street belongs to
    int block = 0;         // position along the line
    bool horizontal = false;
    bool arterial = false;
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    int true_class = 0;
    int label_class = 0;
    bool bridge = false;
    bool tunnel = false;
};

int weighted_pick(Rng& rng, const double* weights) {
    const double u = rng.next_double();
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    return 3;
}

// Every class must occur at least once; a missing class takes over one street
// of the matching line type that currently carries the group's commonest class.
void ensure_all_classes(std::vector<Street>& streets) {
    std::array<int, 8> counts{};
    for (const Street& s : streets) counts[static_cast<std::size_t>(s.true_class)] += 1;
    for (int cls = 0; cls < 8; ++cls) {
        if (counts[static_cast<std::size_t>(cls)] > 0) continue;
        const bool arterial = cls < 4;
        int donor_class = -1;
        for (int c = arterial ? 0 : 4; c < (arterial ? 4 : 8); ++c)
            if (donor_class < 0 || counts[static_cast<std::size_t>(c)] >
                                       counts[static_cast<std::size_t>(donor_class)])
                donor_class = c;
        for (Street& s : streets) {
            if (s.arterial == arterial && s.true_class == donor_class) {
                s.true_class = cls;
                counts[static_cast<std::size_t>(donor_class)] -= 1;
                counts[static_cast<std::size_t>(cls)] += 1;
                break;
            }
        }
    }
}

void paint_strip(RasterGrid& g, double x0, double x1, double y0, double y1, double value) {
    const double cs = g.cellsize;
    const int c0 = std::max(0, static_cast<int>(std::ceil((x0 - g.origin_x) / cs - 0.5)));
    const int c1 = std::min(g.ncols - 1, static_cast<int>(std::floor((x1 - g.origin_x) / cs - 0.5)));
    const int r0 = std::max(
        0, static_cast<int>(std::ceil(g.nrows - 1 - ((y1 - g.origin_y) / cs - 0.5))));
    const int r1 = std::min(
        g.nrows - 1, static_cast<int>(std::floor(g.nrows - 1 - ((y0 - g.origin_y) / cs - 0.5))));
    for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c)
            g.values[static_cast<std::size_t>(r) * static_cast<std::size_t>(g.ncols) +
                     static_cast<std::size_t>(c)] = static_cast<float>(value);
}

RasterGrid blank_grid(const std::string& name, int ncols, int nrows, double origin,
                      double cellsize, double background) {
    RasterGrid g;
    g.channel_name = name;
    g.ncols = ncols;
    g.nrows = nrows;
    g.origin_x = origin;
    g.origin_y = origin;
    g.cellsize = cellsize;
    g.nodata = -9999.0;
    g.values.assign(static_cast<std::size_t>(ncols) * static_cast<std::size_t>(nrows),
                    static_cast<float>(background));
    return g;
}

}  // namespace

void SynthConfig::validate() const {
    if (grid_rows < 1 || grid_cols < 1) throw ConfigError("grid dimensions must be positive");
    if (!(block_m > 0.0)) throw ConfigError("block_m must be positive");
    if (arterial_every < 2) throw ConfigError("arterial_every must be >= 2");
    if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
    if (label_noise < 0.0 || label_noise >= 1.0) throw ConfigError("label_noise must be in [0,1)");
    if (!(cellsize > 0.0)) throw ConfigError("cellsize must be positive");
    if (!(stripe_width_m > 0.0)) throw ConfigError("stripe_width_m must be positive");
    if (run_blocks < 1) throw ConfigError("run_blocks must be >= 1");

    // Planted-signal guarantee: class-conditional intensity means must stay
    // at least 3 sigma apart on every informative channel.
    const double dsm_sigma = noise_sigma / 4.0;
    if (28.0 < 3.0 * noise_sigma || 48.0 < 3.0 * noise_sigma || 12.0 < 3.0 * dsm_sigma)
        throw ConfigError("noise_sigma too large: painted class intensities would be closer "
                          "than 3 sigma");
}

SynthOutput generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();

    SynthOutput out;
    const int rows = cfg.grid_rows, cols = cfg.grid_cols;
    const double block = cfg.block_m;

    std::vector<RoadNode> nodes;
    nodes.reserve(static_cast<std::size_t>((rows + 1) * (cols + 1)));
    for (int i = 0; i <= rows; ++i)
        for (int j = 0; j <= cols; ++j)
            nodes.push_back({"n" + std::to_string(i) + "_" + std::to_string(j), j * block,
                             i * block});

    std::vector<Street> streets;
    for (int i = 0; i <= rows; ++i)
        for (int j = 0; j < cols; ++j) {
            Street s;
            s.id = "h" + std::to_string(i) + "_" + std::to_string(j);
            s.line_key = "h" + std::to_string(i);
            s.block = j;
            s.horizontal = true;
            s.arterial = (i % cfg.arterial_every) == 0;
            s.x0 = j * block;
            s.y0 = i * block;
            s.x1 = (j + 1) * block;
            s.y1 = i * block;
            streets.push_back(std::move(s));
        }
    for (int j = 0; j <= cols; ++j)
        for (int i = 0; i < rows; ++i) {
            Street s;
            s.id = "v" + std::to_string(j) + "_" + std::to_string(i);
            s.line_key = "v" + std::to_string(j);
            s.block = i;
            s.horizontal = false;
            s.arterial = (j % cfg.arterial_every) == 0;
            s.x0 = j * block;
            s.y0 = i * block;
            s.x1 = j * block;
            s.y1 = (i + 1) * block;
            streets.push_back(std::move(s));
        }

    // Class assignment: one draw per run of run_blocks consecutive blocks on
    // a line (run_blocks = 1 keeps the draws independent per street, so graph
    // attributes and positions carry no within-pair signal).
    Rng class_rng(derive_seed(cfg.seed, "classes"));
    std::map<std::pair<std::string, int>, int> run_class;
    for (Street& s : streets) {
        const std::pair<std::string, int> key{s.line_key, s.block / cfg.run_blocks};
        const auto it = run_class.find(key);
        if (it != run_class.end()) {
            s.true_class = it->second;
            continue;
        }
        const int pick = weighted_pick(class_rng, s.arterial ? kArterialWeights : kMinorWeights);
        s.true_class = s.arterial ? pick : 4 + pick;
        run_class.emplace(key, s.true_class);
    }
    ensure_all_classes(streets);
    for (Street& s : streets) s.label_class = s.true_class;

    if (cfg.label_noise > 0.0) {
        Rng noise_rng(derive_seed(cfg.seed, "label_noise"));
        const int k = static_cast<int>(
            std::ceil(cfg.label_noise * static_cast<double>(streets.size())));
        const std::vector<int> chosen =
            noise_rng.sample_without_replacement(static_cast<int>(streets.size()), k);
        std::vector<int> shuffled;
        shuffled.reserve(chosen.size());
        for (const int i : chosen) shuffled.push_back(streets[static_cast<std::size_t>(i)].label_class);
        noise_rng.shuffle(shuffled);
        for (std::size_t i = 0; i < chosen.size(); ++i)
            streets[static_cast<std::size_t>(chosen[i])].label_class = shuffled[i];
    }

    Rng attr_rng(derive_seed(cfg.seed, "attributes"));
    std::vector<RoadEdge> edges;
    edges.reserve(streets.size() * 2);
    for (Street& s : streets) {
        s.bridge = s.arterial && attr_rng.next_double() < 0.05;
        s.tunnel = s.arterial && attr_rng.next_double() < 0.02;
        const int group = group_of(s.true_class);
        const std::string label = ClassTaxonomy::label(s.label_class);
        const auto node_id = [&block](double x, double y) {
            return "n" + std::to_string(static_cast<int>(std::lround(y / block))) + "_" +
                   std::to_string(static_cast<int>(std::lround(x / block)));
        };
        const std::string u = node_id(s.x0, s.y0);
        const std::string v = node_id(s.x1, s.y1);
        for (int dir = 0; dir < 2; ++dir) {
            RoadEdge e;
            e.id = s.id + (dir == 0 ? ":f" : ":r");
            e.u = dir == 0 ? u : v;
            e.v = dir == 0 ? v : u;
            e.geometry = dir == 0 ? Polyline{{s.x0, s.y0}, {s.x1, s.y1}}
                                  : Polyline{{s.x1, s.y1}, {s.x0, s.y0}};
            e.length_m = block;
            e.bearing_deg = edge_bearing(e.geometry);
            const double tt_jitter = std::clamp(1.0 + attr_rng.normal(0.0, 0.05), 0.6, 1.4);
            e.travel_time_s = block / kSpeedMps[group] * tt_jitter;
            const double tp_jitter = std::clamp(1.0 + attr_rng.normal(0.0, 0.10), 0.5, 1.5);
            e.throughput_vpd = kThroughputVpd[group] * tp_jitter;
            e.oneway = false;
            e.bridge = s.bridge;
            e.tunnel = s.tunnel;
            e.highway = label;
            e.parent_id = e.id;
            edges.push_back(std::move(e));
            out.labels.emplace(s.id + (dir == 0 ? ":f" : ":r"), label);
        }
    }

    out.graph = RoadGraph(std::move(nodes), std::move(edges));

    // Rasters: painted class/group stripes on a noisy background.
    const double margin = 80.0;
    const int ncols = static_cast<int>(std::ceil((cols * block + 2.0 * margin) / cfg.cellsize));
    const int nrows = static_cast<int>(std::ceil((rows * block + 2.0 * margin) / cfg.cellsize));
    RasterGrid red = blank_grid("red", ncols, nrows, -margin, cfg.cellsize, kRedBackground);
    RasterGrid green = blank_grid("green", ncols, nrows, -margin, cfg.cellsize, kGreenBackground);
    RasterGrid blue = blank_grid("blue", ncols, nrows, -margin, cfg.cellsize, kBlueBackground);
    RasterGrid dsm = blank_grid("dsm", ncols, nrows, -margin, cfg.cellsize, kDsmBackground);

    const double half = cfg.stripe_width_m / 2.0;
    for (const Street& s : streets) {
        const int group = group_of(s.true_class);
        double x0 = s.x0, x1 = s.x1, y0 = s.y0, y1 = s.y1;
        if (s.horizontal) {
            y0 -= half;
            y1 += half;
        } else {
            x0 -= half;
            x1 += half;
        }
        paint_strip(red, x0, x1, y0, y1, kRedIntensity[s.true_class]);
        paint_strip(green, x0, x1, y0, y1, kGreenIntensity[group]);
        paint_strip(dsm, x0, x1, y0, y1, kDsmHeight[group]);
    }

    Rng raster_rng(derive_seed(cfg.seed, "raster"));
    const auto add_noise = [&raster_rng](RasterGrid& g, double sigma) {
        if (sigma <= 0.0) return;
        for (float& v : g.values) v = static_cast<float>(v + raster_rng.normal(0.0, sigma));
    };
    add_noise(red, cfg.noise_sigma);
    add_noise(green, cfg.noise_sigma);
    add_noise(blue, cfg.noise_sigma);
    add_noise(dsm, cfg.noise_sigma / 4.0);

    const auto channel = [](RasterGrid g, double lo, double hi) {
        RasterChannel ch;
        ch.name = g.channel_name;
        ch.range_lo = lo;
        ch.range_hi = hi;
        ch.grid = std::move(g);
        return ch;
    };
    out.rasters.channels.push_back(channel(std::move(red), 0.0, 256.0));
    out.rasters.channels.push_back(channel(std::move(green), 0.0, 256.0));
    out.rasters.channels.push_back(channel(std::move(blue), 0.0, 256.0));
    out.rasters.channels.push_back(channel(std::move(dsm), 0.0, 64.0));
    return out;
}

SynthPaths write_synthetic(const SynthOutput& out, const std::string& out_dir) {
    ensure_directory(out_dir);
    SynthPaths paths;
    paths.graph = path_join(out_dir, "graph.jsonl");
    save_graph(out.graph, paths.graph);

    nlohmann::json channels = nlohmann::json::array();
    for (const RasterChannel& ch : out.rasters.channels) {
        const std::string file = ch.name + ".asc";
        save_raster(ch.grid, path_join(out_dir, file));
        nlohmann::json cj{{"name", ch.name}, {"path", file}};
        if (ch.range_lo) cj["range_lo"] = *ch.range_lo;
        if (ch.range_hi) cj["range_hi"] = *ch.range_hi;
        channels.push_back(std::move(cj));
    }
    paths.manifest = path_join(out_dir, "manifest.json");
    save_json_file(paths.manifest, nlohmann::json{{"channels", std::move(channels)}});

    paths.labels = path_join(out_dir, "labels.json");
    save_json_file(paths.labels, nlohmann::json{{"labels", out.labels}});
    return paths;
}

SynthConfig synth_config_from_json_file(const std::string& path) {
    const nlohmann::json j = load_json_file(path);
    SynthConfig cfg;
    cfg.grid_rows = j.value("grid_rows", cfg.grid_rows);
    cfg.grid_cols = j.value("grid_cols", cfg.grid_cols);
    cfg.block_m = j.value("block_m", cfg.block_m);
    cfg.arterial_every = j.value("arterial_every", cfg.arterial_every);
    cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
    cfg.label_noise = j.value("label_noise", cfg.label_noise);
    cfg.cellsize = j.value("cellsize", cfg.cellsize);
    cfg.stripe_width_m = j.value("stripe_width_m", cfg.stripe_width_m);
    cfg.run_blocks = j.value("run_blocks", cfg.run_blocks);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.validate();
    return cfg;
}

}  // namespace roadsage
