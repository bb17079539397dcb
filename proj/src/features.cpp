#include "roadsage/features.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "roadsage/errors.hpp"
#include "roadsage/util.hpp"

namespace roadsage {

using nlohmann::json;

std::vector<FeatureField> FeatureSpec::layout() const {
    std::vector<FeatureField> fields;
    fields.push_back({"length_m", 1, FieldKind::numeric});
    fields.push_back({"bearing_sin_cos", 2, FieldKind::numeric});
    fields.push_back({"centroid_km", 2, FieldKind::numeric});
    fields.push_back({"geometry_offsets", 2 * geometry_points, FieldKind::numeric});
    fields.push_back({"oneway", 1, FieldKind::binary});
    fields.push_back({"bridge", 1, FieldKind::binary});
    fields.push_back({"tunnel", 1, FieldKind::binary});
    fields.push_back({"travel_time_s", 1, FieldKind::numeric});
    fields.push_back({"throughput_vpd", 1, FieldKind::numeric});
    if (gps_presence_flags) fields.push_back({"gps_presence", 2, FieldKind::binary});
    if (include_vision) {
        for (const std::string& ch : channels)
            fields.push_back({"hist_" + ch, histogram_bins, FieldKind::histogram});
    }
    return fields;
}

int FeatureSpec::dimension() const {
    int d = 0;
    for (const FeatureField& f : layout()) d += f.width;
    return d;
}

void FeatureSpec::validate() const {
    if (geometry_points < 2) throw ConfigError("geometry_points must be >= 2");
    if (histogram_bins <= 0) throw ConfigError("histogram_bins must be positive");
    if (include_vision && channels.empty())
        throw ConfigError("vision features enabled but no channels configured");
}

FeatureSpec spec_for_graph(FeatureSpec spec, const RoadGraph& g) {
    double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
    double min_y = min_x, max_y = -min_x;
    for (const RoadNode& n : g.nodes()) {
        min_x = std::min(min_x, n.x);
        max_x = std::max(max_x, n.x);
        min_y = std::min(min_y, n.y);
        max_y = std::max(max_y, n.y);
    }
    if (!g.nodes().empty()) {
        spec.centroid_origin_x = (min_x + max_x) / 2.0;
        spec.centroid_origin_y = (min_y + max_y) / 2.0;
    }
    return spec;
}

FeatureVector assemble_features(const RoadEdge& edge, const FeatureSpec& spec,
                                const std::vector<Histogram>* histograms) {
    spec.validate();
    if (spec.include_vision) {
        if (histograms == nullptr ||
            histograms->size() != spec.channels.size())
            throw DataError("edge " + edge.id + ": histogram count does not match channel list");
    } else if (histograms != nullptr) {
        throw DataError("edge " + edge.id + ": histograms passed but vision is disabled");
    }

    FeatureVector fv;
    fv.edge_id = edge.id;
    fv.values.reserve(static_cast<std::size_t>(spec.dimension()));

    fv.values.push_back(edge.length_m);
    const double rad = edge.bearing_deg * 3.14159265358979323846 / 180.0;
    fv.values.push_back(std::sin(rad));
    fv.values.push_back(std::cos(rad));

    const ResampledGeometry rs = resample_geometry(edge.geometry, spec.geometry_points);
    // Centroid relative to the dataset bounding-box center, in kilometers.
    fv.values.push_back((rs.centroid.x - spec.centroid_origin_x) / 1000.0);
    fv.values.push_back((rs.centroid.y - spec.centroid_origin_y) / 1000.0);
    for (const double o : rs.offsets) fv.values.push_back(o);

    fv.values.push_back(edge.oneway ? 1.0 : 0.0);
    fv.values.push_back(edge.bridge ? 1.0 : 0.0);
    fv.values.push_back(edge.tunnel ? 1.0 : 0.0);
    fv.values.push_back(edge.travel_time_s);
    fv.values.push_back(edge.throughput_vpd);
    if (spec.gps_presence_flags) {
        fv.values.push_back(edge.has_travel_time ? 1.0 : 0.0);
        fv.values.push_back(edge.has_throughput ? 1.0 : 0.0);
    }
    if (spec.include_vision) {
        for (std::size_t c = 0; c < spec.channels.size(); ++c) {
            const Histogram& h = (*histograms)[c];
            if (static_cast<int>(h.bins.size()) != spec.histogram_bins)
                throw DataError("edge " + edge.id + ": histogram bin count mismatch on channel " +
                                spec.channels[c]);
            fv.values.insert(fv.values.end(), h.bins.begin(), h.bins.end());
        }
    }

    if (static_cast<int>(fv.values.size()) != spec.dimension())
        throw DataError("edge " + edge.id + ": assembled dimension mismatch");
    for (const double v : fv.values) {
        if (!std::isfinite(v))
            throw DataError("edge " + edge.id + ": non-finite feature value");
    }
    return fv;
}

Normalizer Normalizer::fit(const std::vector<const FeatureVector*>& train,
                           const FeatureSpec& spec) {
    if (train.empty()) throw DataError("normalizer needs at least one training vector");
    const int dim = spec.dimension();
    for (const FeatureVector* fv : train) {
        if (static_cast<int>(fv->values.size()) != dim)
            throw DataError("feature dimension mismatch while fitting normalizer");
    }

    Normalizer z;
    z.mean.assign(static_cast<std::size_t>(dim), 0.0);
    z.stddev.assign(static_cast<std::size_t>(dim), 0.0);
    z.active.assign(static_cast<std::size_t>(dim), true);

    const double n = static_cast<double>(train.size());
    for (const FeatureVector* fv : train)
        for (int i = 0; i < dim; ++i) z.mean[static_cast<std::size_t>(i)] += fv->values[static_cast<std::size_t>(i)];
    for (double& m : z.mean) m /= n;
    for (const FeatureVector* fv : train)
        for (int i = 0; i < dim; ++i) {
            const double d = fv->values[static_cast<std::size_t>(i)] - z.mean[static_cast<std::size_t>(i)];
            z.stddev[static_cast<std::size_t>(i)] += d * d;
        }
    for (double& s : z.stddev) s = std::sqrt(s / n);

    int pos = 0;
    for (const FeatureField& f : spec.layout()) {
        const bool opt_out = (f.kind == FieldKind::binary && !spec.zscore_binary) ||
                             (f.kind == FieldKind::histogram && !spec.zscore_histograms);
        for (int i = 0; i < f.width; ++i, ++pos) {
            if (opt_out || z.stddev[static_cast<std::size_t>(pos)] == 0.0)
                z.active[static_cast<std::size_t>(pos)] = false;
        }
    }
    return z;
}

void Normalizer::apply(FeatureVector& fv) const {
    if (fv.values.size() != mean.size()) throw DataError("normalizer dimension mismatch");
    for (std::size_t i = 0; i < fv.values.size(); ++i) {
        if (!active[i]) continue;
        fv.values[i] = (fv.values[i] - mean[i]) / stddev[i];
    }
}

namespace {

json spec_to_json(const FeatureSpec& spec) {
    json fields = json::array();
    for (const FeatureField& f : spec.layout()) {
        fields.push_back(json::array(
            {f.name, f.width,
             f.kind == FieldKind::numeric ? "numeric"
                                          : (f.kind == FieldKind::binary ? "binary" : "histogram")}));
    }
    return json{{"geometry_points", spec.geometry_points},
                {"include_vision", spec.include_vision},
                {"channels", spec.channels},
                {"histogram_bins", spec.histogram_bins},
                {"gps_presence_flags", spec.gps_presence_flags},
                {"zscore_binary", spec.zscore_binary},
                {"zscore_histograms", spec.zscore_histograms},
                {"centroid_origin_x", spec.centroid_origin_x},
                {"centroid_origin_y", spec.centroid_origin_y},
                {"dimension", spec.dimension()},
                {"layout", std::move(fields)}};
}

FeatureSpec spec_from_json(const json& j) {
    FeatureSpec spec;
    spec.geometry_points = j.at("geometry_points").get<int>();
    spec.include_vision = j.at("include_vision").get<bool>();
    spec.channels = j.at("channels").get<std::vector<std::string>>();
    spec.histogram_bins = j.at("histogram_bins").get<int>();
    spec.gps_presence_flags = j.at("gps_presence_flags").get<bool>();
    spec.zscore_binary = j.at("zscore_binary").get<bool>();
    spec.zscore_histograms = j.at("zscore_histograms").get<bool>();
    spec.centroid_origin_x = j.at("centroid_origin_x").get<double>();
    spec.centroid_origin_y = j.at("centroid_origin_y").get<double>();
    if (j.contains("dimension") && j["dimension"].get<int>() != spec.dimension())
        throw DataError("feature header dimension does not match its layout");
    return spec;
}

}  // namespace

void save_features(const std::string& path, const FeatureSpec& spec,
                   const std::vector<FeatureVector>& vectors, const std::string& config_hash,
                   std::uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write feature file: " + path);
    json header = spec_to_json(spec);
    header["config_hash"] = config_hash;
    header["seed"] = seed;
    out << header.dump() << "\n";
    const int dim = spec.dimension();
    for (const FeatureVector& fv : vectors) {
        if (static_cast<int>(fv.values.size()) != dim)
            throw DataError("feature vector " + fv.edge_id + " has wrong dimension");
        json j{{"edge_id", fv.edge_id}, {"values", fv.values}};
        out << j.dump() << "\n";
    }
    if (!out) throw DataError("write failed: " + path);
}

std::pair<FeatureSpec, std::vector<FeatureVector>> load_features(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open feature file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty feature file");
    json header = json::parse(line, nullptr, false);
    if (header.is_discarded() || !header.is_object() || !header.contains("layout"))
        throw DataError(path + ": missing feature header line");
    FeatureSpec spec = spec_from_json(header);
    const int dim = spec.dimension();

    std::vector<FeatureVector> vectors;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("edge_id") || !j.contains("values"))
            throw DataError(path + ": malformed record at line " + std::to_string(line_no));
        FeatureVector fv;
        fv.edge_id = j["edge_id"].get<std::string>();
        fv.values = j["values"].get<std::vector<double>>();
        if (static_cast<int>(fv.values.size()) != dim)
            throw DataError(path + ": dimension mismatch at line " + std::to_string(line_no));
        vectors.push_back(std::move(fv));
    }
    return {std::move(spec), std::move(vectors)};
}

}  // namespace roadsage
