#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "urbansense/geo.hpp"

namespace urbansense {

/// Uplink payload layout (all multi-byte fields big-endian):
///
///   off  len  field
///     0    1  header (layout version, 0x01)
///     1    1  debug bitfield
///     2    4  latitude  (int32, 1e-7 deg)
///     6    4  longitude (int32, 1e-7 deg)
///    10    4  fix time  (uint32, Unix seconds)
///    14    2  accuracy  (uint16, dm; 0xFFFF = no fix)
///    16    1  battery   (percent, 0xFF = invalid)
///    17    2  temperature (int16, 0.01 degC)
///    19    2  humidity  (uint16, 0.01 %RH)
///    21    4  sitting minutes per interval (0xFF = invalid)
///    25    4  noise dBSPL per interval (0xFF = invalid)
inline constexpr std::size_t kFrameSize = 29;
inline constexpr std::uint8_t kLayoutV1 = 0x01;
inline constexpr std::uint8_t kInvalidByte = 0xFF;
inline constexpr std::size_t kIntervalsPerFrame = 4;

inline constexpr std::uint8_t kMaxSittingMin = 30;
inline constexpr std::uint8_t kMaxNoiseDb = 140;
inline constexpr std::uint16_t kMaxHumidityCRH = 10000;

namespace debug_bits {
inline constexpr std::uint8_t kGnssFix = 0x01;
inline constexpr std::uint8_t kGnssTimeout = 0x02;
inline constexpr std::uint8_t kBatteryLow = 0x04;
inline constexpr std::uint8_t kReservedMask = 0xF8;
} // namespace debug_bits

struct SensorFrame {
    std::uint8_t header = kLayoutV1;
    std::uint8_t debug = 0;
    GeoPosition position = GeoPosition::no_fix();
    std::uint8_t battery_pct = kInvalidByte;
    std::int16_t temperature_cC = 0;
    std::uint16_t humidity_cRH = 0;
    std::array<std::uint8_t, kIntervalsPerFrame> sitting_min{};
    std::array<std::uint8_t, kIntervalsPerFrame> noise_db{};

    friend bool operator==(const SensorFrame &, const SensorFrame &) = default;
};

using FrameBytes = std::array<std::uint8_t, kFrameSize>;

/// Throws EncodeError naming the first field that breaks an invariant.
FrameBytes encode_frame(const SensorFrame &frame);

/// Throws LengthError, UnknownLayoutError or RangeError.
SensorFrame decode_frame(std::span<const std::uint8_t> bytes);

/// Lowercase hex, no separators.
std::string to_hex(std::span<const std::uint8_t> bytes);
/// Accepts either case; throws HexError on odd length or non-hex digits.
std::vector<std::uint8_t> from_hex(std::string_view hex);

std::string encode_frame_hex(const SensorFrame &frame);
SensorFrame decode_frame_hex(std::string_view hex);

void to_json(nlohmann::json &j, const SensorFrame &frame);
void from_json(const nlohmann::json &j, SensorFrame &frame);

} // namespace urbansense
