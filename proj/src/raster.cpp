#include "roadsage/raster.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "roadsage/errors.hpp"
#include "roadsage/util.hpp"

namespace roadsage {

void RasterGrid::validate() const {
    if (ncols <= 0 || nrows <= 0) throw DataError("raster dimensions must be positive");
    if (!(cellsize > 0.0)) throw DataError("raster cellsize must be positive");
    if (values.size() != static_cast<std::size_t>(ncols) * static_cast<std::size_t>(nrows))
        throw DataError("raster value count does not match ncols*nrows");
}

double RasterGrid::min_value() const {
    double lo = std::numeric_limits<double>::infinity();
    for (const float v : values)
        if (!is_nodata(v)) lo = std::min(lo, static_cast<double>(v));
    return std::isfinite(lo) ? lo : 0.0;
}

double RasterGrid::max_value() const {
    double hi = -std::numeric_limits<double>::infinity();
    for (const float v : values)
        if (!is_nodata(v)) hi = std::max(hi, static_cast<double>(v));
    return std::isfinite(hi) ? hi : 0.0;
}

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

RasterGrid load_raster(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open raster file: " + path);

    RasterGrid g;
    bool have_ncols = false, have_nrows = false, have_x = false, have_y = false,
         have_cell = false;

    // Header: key/value lines until the first purely numeric token.
    std::string tok;
    double pending_value = 0.0;
    bool pending = false;
    while (in >> tok) {
        const std::string key = lower(tok);
        if (key == "ncols" || key == "nrows" || key == "xllcorner" || key == "yllcorner" ||
            key == "cellsize" || key == "nodata_value") {
            double val;
            if (!(in >> val)) throw DataError(path + ": missing value for header key " + tok);
            if (key == "ncols") {
                g.ncols = static_cast<int>(val);
                have_ncols = true;
            } else if (key == "nrows") {
                g.nrows = static_cast<int>(val);
                have_nrows = true;
            } else if (key == "xllcorner") {
                g.origin_x = val;
                have_x = true;
            } else if (key == "yllcorner") {
                g.origin_y = val;
                have_y = true;
            } else if (key == "cellsize") {
                g.cellsize = val;
                have_cell = true;
            } else {
                g.nodata = val;
            }
        } else {
            const char* begin = tok.data();
            const char* end = begin + tok.size();
            double val = 0.0;
            const auto res = std::from_chars(begin, end, val);
            if (res.ec != std::errc() || res.ptr != end)
                throw DataError(path + ": unexpected token '" + tok + "'");
            pending_value = val;
            pending = true;
            break;
        }
    }
    if (!have_ncols || !have_nrows || !have_x || !have_y || !have_cell)
        throw DataError(path + ": incomplete ASCII grid header");
    if (g.ncols <= 0 || g.nrows <= 0) throw DataError(path + ": non-positive grid dimensions");
    if (!(g.cellsize > 0.0)) throw DataError(path + ": cellsize must be positive");

    const std::size_t expected =
        static_cast<std::size_t>(g.ncols) * static_cast<std::size_t>(g.nrows);
    g.values.reserve(expected);
    if (pending) g.values.push_back(static_cast<float>(pending_value));
    double val;
    while (in >> val) {
        if (g.values.size() >= expected)
            throw DataError(path + ": more values than ncols*nrows");
        g.values.push_back(static_cast<float>(val));
    }
    if (!in.eof()) {
        in.clear();
        std::string bad;
        in >> bad;
        throw DataError(path + ": non-numeric cell value '" + bad + "'");
    }
    if (g.values.size() != expected)
        throw DataError(path + ": expected " + std::to_string(expected) + " values, got " +
                        std::to_string(g.values.size()));
    return g;
}

void save_raster(const RasterGrid& grid, const std::string& path) {
    grid.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write raster file: " + path);
    out << "ncols " << grid.ncols << "\n";
    out << "nrows " << grid.nrows << "\n";
    char buf[64];
    const auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.10g", v);
        return std::string(buf);
    };
    out << "xllcorner " << fmt(grid.origin_x) << "\n";
    out << "yllcorner " << fmt(grid.origin_y) << "\n";
    out << "cellsize " << fmt(grid.cellsize) << "\n";
    out << "NODATA_value " << fmt(grid.nodata) << "\n";
    for (int r = 0; r < grid.nrows; ++r) {
        for (int c = 0; c < grid.ncols; ++c) {
            if (c) out << ' ';
            std::snprintf(buf, sizeof(buf), "%.6g", grid.value_at(c, r));
            out << buf;
        }
        out << "\n";
    }
    if (!out) throw DataError("write failed: " + path);
}

std::array<Point, 4> FootprintRect::corners() const {
    const double rad = bearing_deg * 3.14159265358979323846 / 180.0;
    const double ux = std::sin(rad), uy = std::cos(rad);   // along the bearing
    const double vx = std::cos(rad), vy = -std::sin(rad);  // across
    const double h = height_m / 2.0, w = width_m / 2.0;
    return {Point{center.x + h * ux + w * vx, center.y + h * uy + w * vy},
            Point{center.x + h * ux - w * vx, center.y + h * uy - w * vy},
            Point{center.x - h * ux - w * vx, center.y - h * uy - w * vy},
            Point{center.x - h * ux + w * vx, center.y - h * uy + w * vy}};
}

bool FootprintRect::contains(const Point& p) const {
    const double rad = bearing_deg * 3.14159265358979323846 / 180.0;
    const double ux = std::sin(rad), uy = std::cos(rad);
    const double vx = std::cos(rad), vy = -std::sin(rad);
    const double dx = p.x - center.x, dy = p.y - center.y;
    const double a = dx * ux + dy * uy;
    const double b = dx * vx + dy * vy;
    return std::abs(a) <= height_m / 2.0 && std::abs(b) <= width_m / 2.0;
}

FootprintRect footprint_rectangle(const RoadEdge& edge, double width_m, double height_m,
                                  int resample_points) {
    if (!(width_m > 0.0) || !(height_m > 0.0))
        throw ConfigError("footprint extents must be positive");
    const ResampledGeometry rs = resample_geometry(edge.geometry, resample_points);
    FootprintRect rect;
    rect.center = rs.centroid;
    rect.bearing_deg = edge.bearing_deg;
    rect.width_m = width_m;
    rect.height_m = height_m;
    return rect;
}

std::vector<double> sample_patch(const RasterGrid& raster, const FootprintRect& rect) {
    raster.validate();
    const auto corners = rect.corners();
    double min_x = corners[0].x, max_x = corners[0].x;
    double min_y = corners[0].y, max_y = corners[0].y;
    for (const Point& c : corners) {
        min_x = std::min(min_x, c.x);
        max_x = std::max(max_x, c.x);
        min_y = std::min(min_y, c.y);
        max_y = std::max(max_y, c.y);
    }
    // Candidate cells: those whose centers can fall inside the bounding box.
    const auto col_of = [&](double x) { return (x - raster.origin_x) / raster.cellsize - 0.5; };
    const auto row_of = [&](double y) {
        return raster.nrows - 1 - ((y - raster.origin_y) / raster.cellsize - 0.5);
    };
    const int col_lo = std::max(0, static_cast<int>(std::ceil(col_of(min_x) - 1e-9)));
    const int col_hi = std::min(raster.ncols - 1, static_cast<int>(std::floor(col_of(max_x) + 1e-9)));
    const int row_lo = std::max(0, static_cast<int>(std::ceil(row_of(max_y) - 1e-9)));
    const int row_hi = std::min(raster.nrows - 1, static_cast<int>(std::floor(row_of(min_y) + 1e-9)));

    std::vector<double> out;
    for (int r = row_lo; r <= row_hi; ++r) {
        const double cy = raster.cell_center_y(r);
        for (int c = col_lo; c <= col_hi; ++c) {
            const Point p{raster.cell_center_x(c), cy};
            if (!rect.contains(p)) continue;
            const double v = raster.value_at(c, r);
            if (raster.is_nodata(v)) continue;
            out.push_back(v);
        }
    }
    return out;
}

Histogram intensity_histogram(const std::vector<double>& pixels, int bins, double range_lo,
                              double range_hi) {
    if (bins <= 0) throw ConfigError("histogram bin count must be positive");
    if (!(range_hi > range_lo)) throw ConfigError("histogram range_hi must exceed range_lo");

    Histogram h;
    h.range_lo = range_lo;
    h.range_hi = range_hi;
    h.bins.assign(static_cast<std::size_t>(bins), 0.0);
    h.pixel_count = static_cast<long>(pixels.size());
    if (pixels.empty()) return h;

    const double width = (range_hi - range_lo) / bins;
    for (const double v : pixels) {
        int idx = static_cast<int>(std::floor((v - range_lo) / width));
        idx = std::clamp(idx, 0, bins - 1);  // out-of-range values land in the end bins
        h.bins[static_cast<std::size_t>(idx)] += 1.0;
    }
    for (double& b : h.bins) b /= static_cast<double>(h.pixel_count);
    return h;
}

RasterStack load_raster_manifest(const std::string& manifest_path) {
    const nlohmann::json j = load_json_file(manifest_path);
    if (!j.is_object() || !j.contains("channels") || !j["channels"].is_array())
        throw DataError(manifest_path + ": manifest needs a 'channels' array");
    const std::string base = parent_path(manifest_path);

    RasterStack stack;
    for (const auto& cj : j["channels"]) {
        RasterChannel ch;
        if (!cj.contains("name") || !cj["name"].is_string())
            throw DataError(manifest_path + ": channel without name");
        ch.name = cj["name"].get<std::string>();
        if (!cj.contains("path") || !cj["path"].is_string())
            throw DataError(manifest_path + ": channel without path");
        ch.path = cj["path"].get<std::string>();
        if (cj.contains("range_lo") && cj["range_lo"].is_number())
            ch.range_lo = cj["range_lo"].get<double>();
        if (cj.contains("range_hi") && cj["range_hi"].is_number())
            ch.range_hi = cj["range_hi"].get<double>();
        const std::string full =
            ch.path.front() == '/' ? ch.path : path_join(base, ch.path);
        ch.grid = load_raster(full);
        ch.grid.channel_name = ch.name;
        stack.channels.push_back(std::move(ch));
    }
    if (stack.channels.empty()) throw DataError(manifest_path + ": no channels");
    return stack;
}

}  // namespace roadsage
