#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace urbansense {

/// Position fix in fixed-point 1e-7 degrees.
struct GeoPosition {
    /// Accuracy value meaning "receiver timed out / no fix".
    static constexpr std::uint16_t kNoFix = 0xFFFF;
    static constexpr std::int32_t kMaxLatE7 = 900'000'000;
    static constexpr std::int32_t kMaxLonE7 = 1'800'000'000;

    std::int32_t latitude_e7 = 0;
    std::int32_t longitude_e7 = 0;
    std::uint16_t accuracy_dm = kNoFix;
    std::uint32_t fix_time_s = 0;

    [[nodiscard]] bool has_fix() const { return accuracy_dm != kNoFix; }
    /// Range and sentinel invariants.
    [[nodiscard]] bool valid() const;

    [[nodiscard]] double latitude_deg() const { return latitude_e7 * 1e-7; }
    [[nodiscard]] double longitude_deg() const { return longitude_e7 * 1e-7; }

    static GeoPosition no_fix(std::uint32_t fix_time_s = 0) { return {0, 0, kNoFix, fix_time_s}; }
    /// Rounds degrees to the nearest 1e-7.
    static GeoPosition from_degrees(double lat, double lon, std::uint16_t accuracy_dm = 0,
                                    std::uint32_t fix_time_s = 0);

    friend bool operator==(const GeoPosition &, const GeoPosition &) = default;
};

struct SquareDefinition {
    std::string id;
    std::string name;
    std::vector<GeoPosition> boundary;
};

/// Throws GeometryError unless the boundary is a simple polygon of at least
/// three valid, not-all-collinear vertices.
void validate_square(const SquareDefinition &sq);

/// Ray casting; points on an edge or vertex count as inside.
/// Throws GeometryError for an invalid polygon or a position without fix.
bool point_in_square(const GeoPosition &p, const SquareDefinition &sq);

/// Same test without re-validating the polygon.
bool point_in_polygon(const GeoPosition &p, std::span<const GeoPosition> boundary);

struct NodeIdentity {
    std::string dev_eui; ///< 16 lowercase hex characters
    std::string label;
    friend bool operator==(const NodeIdentity &, const NodeIdentity &) = default;
};

/// Lowercases and checks a DevEUI; throws ParamError when not 16 hex digits.
std::string normalize_dev_eui(std::string_view eui);

} // namespace urbansense
