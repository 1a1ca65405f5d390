#include "urbansense/geo.hpp"

#include <cctype>
#include <cmath>

#include "urbansense/errors.hpp"

namespace urbansense {

namespace {

using Wide = __int128;

struct Pt {
    std::int64_t x; // longitude e7
    std::int64_t y; // latitude e7
};

Pt to_pt(const GeoPosition &g) { return {g.longitude_e7, g.latitude_e7}; }

// Sign of (b - a) x (c - a).
int orientation(Pt a, Pt b, Pt c) {
    const Wide v = static_cast<Wide>(b.x - a.x) * (c.y - a.y) - static_cast<Wide>(b.y - a.y) * (c.x - a.x);
    return (v > 0) - (v < 0);
}

bool on_segment(Pt a, Pt b, Pt p) {
    return orientation(a, b, p) == 0 && std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Pt a, Pt b, Pt c, Pt d) {
    const int o1 = orientation(a, b, c);
    const int o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a);
    const int o4 = orientation(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    return (o1 == 0 && on_segment(a, b, c)) || (o2 == 0 && on_segment(a, b, d)) ||
           (o3 == 0 && on_segment(c, d, a)) || (o4 == 0 && on_segment(c, d, b));
}

} // namespace

bool GeoPosition::valid() const {
    if (latitude_e7 < -kMaxLatE7 || latitude_e7 > kMaxLatE7) return false;
    if (longitude_e7 < -kMaxLonE7 || longitude_e7 > kMaxLonE7) return false;
    if (!has_fix() && (latitude_e7 != 0 || longitude_e7 != 0)) return false;
    return true;
}

GeoPosition GeoPosition::from_degrees(double lat, double lon, std::uint16_t accuracy_dm, std::uint32_t fix_time_s) {
    return {static_cast<std::int32_t>(std::llround(lat * 1e7)), static_cast<std::int32_t>(std::llround(lon * 1e7)),
            accuracy_dm, fix_time_s};
}

void validate_square(const SquareDefinition &sq) {
    const auto &v = sq.boundary;
    const std::size_t n = v.size();
    if (n < 3) throw GeometryError("square '" + sq.id + "': polygon needs at least 3 vertices");
    for (std::size_t i = 0; i < n; ++i) {
        if (!v[i].valid()) throw GeometryError("square '" + sq.id + "': vertex " + std::to_string(i) + " out of range");
        if (to_pt(v[i]).x == to_pt(v[(i + 1) % n]).x && to_pt(v[i]).y == to_pt(v[(i + 1) % n]).y) {
            throw GeometryError("square '" + sq.id + "': repeated vertex " + std::to_string(i));
        }
    }
    bool all_collinear = true;
    for (std::size_t i = 2; i < n && all_collinear; ++i) {
        all_collinear = orientation(to_pt(v[0]), to_pt(v[1]), to_pt(v[i])) == 0;
    }
    if (all_collinear) throw GeometryError("square '" + sq.id + "': vertices are collinear");

    // Non-adjacent edges must not touch; adjacent edges may only share their vertex.
    for (std::size_t i = 0; i < n; ++i) {
        const Pt a = to_pt(v[i]);
        const Pt b = to_pt(v[(i + 1) % n]);
        for (std::size_t j = i + 1; j < n; ++j) {
            const Pt c = to_pt(v[j]);
            const Pt d = to_pt(v[(j + 1) % n]);
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if (adjacent) {
                // Shared vertex is fine; folding back over the other edge is not.
                const Pt shared = j == i + 1 ? b : a;
                const Pt other_far = j == i + 1 ? d : c;
                const Pt mine_far = j == i + 1 ? a : b;
                if (orientation(mine_far, shared, other_far) == 0 &&
                    (on_segment(mine_far, shared, other_far) || on_segment(shared, other_far, mine_far))) {
                    throw GeometryError("square '" + sq.id + "': edges " + std::to_string(i) + " and " +
                                        std::to_string(j) + " overlap");
                }
                continue;
            }
            if (segments_intersect(a, b, c, d)) {
                throw GeometryError("square '" + sq.id + "': edges " + std::to_string(i) + " and " +
                                    std::to_string(j) + " intersect");
            }
        }
    }
}

bool point_in_polygon(const GeoPosition &p, std::span<const GeoPosition> boundary) {
    const Pt q = to_pt(p);
    const std::size_t n = boundary.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Pt a = to_pt(boundary[i]);
        const Pt b = to_pt(boundary[j]);
        if (on_segment(a, b, q)) return true;
        // Half-open rule on y avoids double counting vertices.
        if ((a.y > q.y) != (b.y > q.y)) {
            // Crossing x is to the right of q iff orientation says so, taking edge direction into account.
            const int o = orientation(a, b, q);
            const bool upward = b.y > a.y;
            if ((upward && o > 0) || (!upward && o < 0)) inside = !inside;
        }
    }
    return inside;
}

bool point_in_square(const GeoPosition &p, const SquareDefinition &sq) {
    validate_square(sq);
    if (!p.has_fix()) throw GeometryError("position has no fix");
    if (!p.valid()) throw GeometryError("position out of range");
    return point_in_polygon(p, sq.boundary);
}

std::string normalize_dev_eui(std::string_view eui) {
    if (eui.size() != 16) throw ParamError("dev_eui must be 16 hex characters: '" + std::string(eui) + "'");
    std::string out(eui);
    for (char &c : out) {
        if (!std::isxdigit(static_cast<unsigned char>(c))) {
            throw ParamError("dev_eui must be 16 hex characters: '" + std::string(eui) + "'");
        }
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

} // namespace urbansense
