#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "roadsage/errors.hpp"
#include "roadsage/experiment.hpp"
#include "roadsage/pipeline.hpp"
#include "roadsage/synth.hpp"

namespace py = pybind11;
using namespace roadsage;

namespace {

using XY = std::pair<double, double>;

Polyline to_polyline(const std::vector<XY>& pts) {
    Polyline line;
    line.reserve(pts.size());
    for (const auto& [x, y] : pts) line.push_back({x, y});
    return line;
}

std::vector<XY> from_polyline(const Polyline& line) {
    std::vector<XY> out;
    out.reserve(line.size());
    for (const Point& p : line) out.emplace_back(p.x, p.y);
    return out;
}

py::dict edge_to_dict(const RoadEdge& e) {
    py::dict d;
    d["id"] = e.id;
    d["u"] = e.u;
    d["v"] = e.v;
    d["geometry"] = from_polyline(e.geometry);
    d["length_m"] = e.length_m;
    d["bearing_deg"] = e.bearing_deg;
    d["travel_time_s"] = e.travel_time_s;
    d["throughput_vpd"] = e.throughput_vpd;
    d["oneway"] = e.oneway;
    d["bridge"] = e.bridge;
    d["tunnel"] = e.tunnel;
    d["highway"] = e.highway ? py::object(py::str(*e.highway)) : py::object(py::none());
    d["parent_id"] = e.parent_id;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "road network segmentation, visual feature fusion and GraphSAGE training";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<RoadGraph>(m, "RoadGraph")
        .def_property_readonly("num_nodes",
                               [](const RoadGraph& g) { return g.nodes().size(); })
        .def_property_readonly("num_edges",
                               [](const RoadGraph& g) { return g.edges().size(); })
        .def("edge_ids",
             [](const RoadGraph& g) {
                 std::vector<std::string> ids;
                 for (const RoadEdge& e : g.edges()) ids.push_back(e.id);
                 return ids;
             })
        .def("node_ids",
             [](const RoadGraph& g) {
                 std::vector<std::string> ids;
                 for (const RoadNode& n : g.nodes()) ids.push_back(n.id);
                 return ids;
             })
        .def("edge", [](const RoadGraph& g, const std::string& id) {
            return edge_to_dict(g.edge(id));
        });

    py::class_<DualGraph>(m, "DualGraph")
        .def_property_readonly("num_nodes", &DualGraph::size)
        .def("node_ids", [](const DualGraph& d) { return d.node_ids(); })
        .def("edges", [](const DualGraph& d) { return d.edges(); })
        .def("neighbors",
             [](const DualGraph& d, int i) {
                 if (i < 0 || i >= d.size()) throw DataError("dual node index out of range");
                 return d.neighbors()[static_cast<std::size_t>(i)];
             })
        .def("index_of", &DualGraph::index_of);

    py::class_<RasterGrid>(m, "RasterGrid")
        .def_readonly("ncols", &RasterGrid::ncols)
        .def_readonly("nrows", &RasterGrid::nrows)
        .def_readonly("cellsize", &RasterGrid::cellsize)
        .def_readonly("origin_x", &RasterGrid::origin_x)
        .def_readonly("origin_y", &RasterGrid::origin_y)
        .def("value_at", &RasterGrid::value_at, py::arg("col"), py::arg("row"));

    m.def("load_graph", &load_graph, py::arg("path"));
    m.def("save_graph", &save_graph, py::arg("graph"), py::arg("path"));
    m.def(
        "segment_graph",
        [](const RoadGraph& g, double target_traveltime_s, double target_length_m) {
            SegmentationConfig cfg;
            cfg.target_traveltime_s = target_traveltime_s;
            cfg.target_length_m = target_length_m;
            return segment_pipeline(g, cfg);
        },
        py::arg("graph"), py::arg("target_traveltime_s") = 15.0,
        py::arg("target_length_m") = 120.0);
    m.def("to_dual", &to_dual, py::arg("graph"));

    m.def(
        "edge_bearing",
        [](const std::vector<XY>& pts) { return edge_bearing(to_polyline(pts)); },
        py::arg("geometry"));
    m.def(
        "resample_geometry",
        [](const std::vector<XY>& pts, int m_points) {
            const ResampledGeometry rs = resample_geometry(to_polyline(pts), m_points);
            py::dict d;
            d["centroid"] = XY{rs.centroid.x, rs.centroid.y};
            d["points"] = from_polyline(rs.points);
            d["offsets"] = rs.offsets;
            return d;
        },
        py::arg("geometry"), py::arg("m") = 5);
    m.def(
        "interpolate_along",
        [](const std::vector<XY>& pts, double t) {
            const SplitResult r = interpolate_along(to_polyline(pts), t);
            py::dict d;
            d["at"] = XY{r.at.x, r.at.y};
            d["before"] = from_polyline(r.before);
            d["after"] = from_polyline(r.after);
            return d;
        },
        py::arg("geometry"), py::arg("t"));

    m.def("load_raster", &load_raster, py::arg("path"));
    m.def(
        "sample_patch",
        [](const RasterGrid& grid, XY center, double bearing_deg, double width_m,
           double height_m) {
            FootprintRect rect;
            rect.center = {center.first, center.second};
            rect.bearing_deg = bearing_deg;
            rect.width_m = width_m;
            rect.height_m = height_m;
            return sample_patch(grid, rect);
        },
        py::arg("grid"), py::arg("center"), py::arg("bearing_deg") = 0.0,
        py::arg("width_m") = 120.0, py::arg("height_m") = 120.0);
    m.def(
        "intensity_histogram",
        [](const std::vector<double>& pixels, int bins, double lo, double hi) {
            return intensity_histogram(pixels, bins, lo, hi).bins;
        },
        py::arg("pixels"), py::arg("bins") = 32, py::arg("range_lo") = 0.0,
        py::arg("range_hi") = 256.0);

    m.def("class_labels", [] {
        return std::vector<std::string>(ClassTaxonomy::labels().begin(),
                                        ClassTaxonomy::labels().end());
    });
    m.def("aggregate_binary", &aggregate_binary, py::arg("pred8"));
    m.def("micro_f1", &micro_f1, py::arg("predictions"), py::arg("labels"));

    m.def(
        "generate_synthetic",
        [](const std::string& config_json, const std::string& out_dir) {
            const nlohmann::json j = nlohmann::json::parse(config_json, nullptr, false);
            if (j.is_discarded()) throw ConfigError("malformed synth config JSON");
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
            const SynthPaths paths = write_synthetic(generate_synthetic(cfg), out_dir);
            py::dict d;
            d["graph"] = paths.graph;
            d["manifest"] = paths.manifest;
            d["labels"] = paths.labels;
            return d;
        },
        py::arg("config_json"), py::arg("out_dir"));

    m.def(
        "run_pipeline",
        [](const std::string& config_json) {
            const nlohmann::json j = nlohmann::json::parse(config_json, nullptr, false);
            if (j.is_discarded()) throw ConfigError("malformed pipeline config JSON");
            return run_pipeline(PipelineConfig::from_json(j)).dump();
        },
        py::arg("config_json"));
    m.def(
        "run_pipeline_file",
        [](const std::string& config_path) {
            return run_pipeline(load_pipeline_config(config_path)).dump();
        },
        py::arg("config_path"));
}
