#pragma once

#include <vector>

namespace roadsage {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }

// Road geometry: planar projected coordinates in meters, >= 2 vertices.
using Polyline = std::vector<Point>;

double polyline_length(const Polyline& line);

// Compass direction of the first->last displacement, degrees clockwise from
// north (+y), in [0, 360). Throws DataError on zero displacement.
double edge_bearing(const Polyline& line);

// Point at arc-length fraction t in [0, 1].
Point point_at_fraction(const Polyline& line, double t);

// Sub-polyline between arc-length fractions t0 <= t1. Interior vertices of
// the source line are kept; cut points are appended at both ends.
Polyline slice_polyline(const Polyline& line, double t0, double t1);

struct SplitResult {
    Point at;
    Polyline before;
    Polyline after;
};

// Splits at arc-length fraction t; both halves retain original vertices plus
// the split point. t == 0 or t == 1 degenerates one side to a single point.
SplitResult interpolate_along(const Polyline& line, double t);

struct ResampledGeometry {
    Point centroid;                // arithmetic mean of the resampled points
    std::vector<Point> points;     // m points at fractions 0, 1/(m-1), ..., 1
    std::vector<double> offsets;   // (northing, easting) per point minus centroid
};

ResampledGeometry resample_geometry(const Polyline& line, int m);

}  // namespace roadsage
