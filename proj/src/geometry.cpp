#include "roadsage/geometry.hpp"

#include <cmath>
#include <string>

#include "roadsage/errors.hpp"

namespace roadsage {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> cumulative_lengths(const Polyline& line) {
    std::vector<double> cum(line.size(), 0.0);
    for (std::size_t i = 1; i < line.size(); ++i) {
        const double dx = line[i].x - line[i - 1].x;
        const double dy = line[i].y - line[i - 1].y;
        cum[i] = cum[i - 1] + std::hypot(dx, dy);
    }
    return cum;
}

void require_polyline(const Polyline& line) {
    if (line.size() < 2) throw DataError("polyline needs at least 2 points");
}

}  // namespace

double polyline_length(const Polyline& line) {
    require_polyline(line);
    return cumulative_lengths(line).back();
}

double edge_bearing(const Polyline& line) {
    require_polyline(line);
    const double dx = line.back().x - line.front().x;
    const double dy = line.back().y - line.front().y;
    if (dx == 0.0 && dy == 0.0)
        throw DataError("degenerate geometry: zero end-to-end displacement");
    double deg = std::atan2(dx, dy) * 180.0 / kPi;  // clockwise from +y
    if (deg < 0.0) deg += 360.0;
    if (deg >= 360.0) deg -= 360.0;
    return deg;
}

Point point_at_fraction(const Polyline& line, double t) {
    require_polyline(line);
    if (t < 0.0 || t > 1.0)
        throw DataError("arc-length fraction outside [0,1]: " + std::to_string(t));
    const std::vector<double> cum = cumulative_lengths(line);
    const double total = cum.back();
    if (total <= 0.0) throw DataError("degenerate geometry: zero arc length");
    const double target = t * total;
    for (std::size_t i = 1; i < line.size(); ++i) {
        if (target <= cum[i] || i + 1 == line.size()) {
            const double seg = cum[i] - cum[i - 1];
            const double f = seg > 0.0 ? (target - cum[i - 1]) / seg : 0.0;
            return {line[i - 1].x + f * (line[i].x - line[i - 1].x),
                    line[i - 1].y + f * (line[i].y - line[i - 1].y)};
        }
    }
    return line.back();
}

Polyline slice_polyline(const Polyline& line, double t0, double t1) {
    require_polyline(line);
    if (t0 < 0.0 || t1 > 1.0 || t0 > t1) throw DataError("bad slice fractions");
    const std::vector<double> cum = cumulative_lengths(line);
    const double total = cum.back();
    if (total <= 0.0) throw DataError("degenerate geometry: zero arc length");
    const double lo = t0 * total;
    const double hi = t1 * total;

    Polyline out;
    out.push_back(point_at_fraction(line, t0));
    for (std::size_t i = 1; i + 1 < line.size(); ++i) {
        if (cum[i] > lo && cum[i] < hi) {
            // Keep interior vertices strictly between the cuts; duplicated
            // cut points would create zero-length segments.
            const Point& p = line[i];
            if (!(p == out.back())) out.push_back(p);
        }
    }
    const Point end = point_at_fraction(line, t1);
    if (!(end == out.back()) || out.size() == 1) out.push_back(end);
    return out;
}

SplitResult interpolate_along(const Polyline& line, double t) {
    require_polyline(line);
    if (t < 0.0 || t > 1.0)
        throw DataError("arc-length fraction outside [0,1]: " + std::to_string(t));
    SplitResult r;
    r.at = point_at_fraction(line, t);
    if (t == 0.0) {
        r.before = {line.front()};
        r.after = line;
    } else if (t == 1.0) {
        r.before = line;
        r.after = {line.back()};
    } else {
        r.before = slice_polyline(line, 0.0, t);
        r.after = slice_polyline(line, t, 1.0);
    }
    return r;
}

ResampledGeometry resample_geometry(const Polyline& line, int m) {
    require_polyline(line);
    if (m < 2) throw DataError("resample point count must be >= 2");
    if (polyline_length(line) <= 0.0) throw DataError("degenerate geometry: zero arc length");

    ResampledGeometry out;
    out.points.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        out.points.push_back(point_at_fraction(line, static_cast<double>(i) / (m - 1)));
    }
    double cx = 0.0, cy = 0.0;
    for (const Point& p : out.points) {
        cx += p.x;
        cy += p.y;
    }
    out.centroid = {cx / m, cy / m};
    out.offsets.reserve(static_cast<std::size_t>(2 * m));
    for (const Point& p : out.points) {
        out.offsets.push_back(p.y - out.centroid.y);  // northing
        out.offsets.push_back(p.x - out.centroid.x);  // easting
    }
    return out;
}

}  // namespace roadsage
