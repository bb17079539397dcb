#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "roadsage/geometry.hpp"
#include "roadsage/graph.hpp"

namespace roadsage {

// Georeferenced single-channel pixel grid. Values are stored row-major with
// the top row first, as laid out in the ASCII-grid file format.
struct RasterGrid {
    std::string channel_name;
    double origin_x = 0.0;  // lower-left corner x, meters
    double origin_y = 0.0;  // lower-left corner y, meters
    double cellsize = 1.0;  // meters per pixel
    int ncols = 0;
    int nrows = 0;
    double nodata = -9999.0;
    std::vector<float> values;

    double value_at(int col, int row) const {  // row 0 = top
        return values[static_cast<std::size_t>(row) * static_cast<std::size_t>(ncols) +
                      static_cast<std::size_t>(col)];
    }
    double cell_center_x(int col) const { return origin_x + (col + 0.5) * cellsize; }
    double cell_center_y(int row) const { return origin_y + (nrows - 1 - row + 0.5) * cellsize; }
    bool is_nodata(double v) const { return static_cast<float>(v) == static_cast<float>(nodata); }

    void validate() const;
    double min_value() const;  // nodata excluded
    double max_value() const;
};

// ASCII grid: header lines ncols, nrows, xllcorner, yllcorner, cellsize,
// NODATA_value (optional), then nrows whitespace-separated rows, top first.
RasterGrid load_raster(const std::string& path);
void save_raster(const RasterGrid& grid, const std::string& path);

// Oriented rectangle around a road footprint: centered on the centroid of
// the resampled geometry, long axis along the bearing.
struct FootprintRect {
    Point center;
    double bearing_deg = 0.0;
    double width_m = 120.0;   // across the bearing axis
    double height_m = 120.0;  // along the bearing axis

    std::array<Point, 4> corners() const;
    bool contains(const Point& p) const;
};

FootprintRect footprint_rectangle(const RoadEdge& edge, double width_m = 120.0,
                                  double height_m = 120.0, int resample_points = 5);

// Values of all raster cells whose centers lie inside the rectangle, nodata
// excluded, in row-major scan order of the rectangle's bounding box. An
// empty result signals a rectangle that covers no usable cells.
std::vector<double> sample_patch(const RasterGrid& raster, const FootprintRect& rect);

struct Histogram {
    std::vector<double> bins;  // relative frequencies; all zero when empty
    double range_lo = 0.0;
    double range_hi = 0.0;
    long pixel_count = 0;
};

// Equal-width bins over [range_lo, range_hi); out-of-range values clamp into
// the end bins, values exactly at range_hi fall into the last bin.
Histogram intensity_histogram(const std::vector<double>& pixels, int bins, double range_lo,
                              double range_hi);

struct RasterChannel {
    std::string name;
    std::string path;
    std::optional<double> range_lo;  // histogram range; data min/max when absent
    std::optional<double> range_hi;
    RasterGrid grid;

    double histogram_lo() const { return range_lo ? *range_lo : grid.min_value(); }
    double histogram_hi() const { return range_hi ? *range_hi : grid.max_value(); }
};

// Channel set described by a JSON manifest {"channels":[{"name","path",
// "range_lo","range_hi"}...]}; paths resolve relative to the manifest.
struct RasterStack {
    std::vector<RasterChannel> channels;
};

RasterStack load_raster_manifest(const std::string& manifest_path);

}  // namespace roadsage
