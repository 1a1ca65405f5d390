#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "urbansense/codec.hpp"
#include "urbansense/time.hpp"

namespace urbansense {

inline constexpr int kDefaultIntervalS = 1800;

struct IntervalRow {
    UnixSeconds interval_start = 0;
    std::uint8_t sitting_min = 0;
    std::uint8_t noise_db = 0;
};

/// One stored, decoded uplink.
struct MeasurementRecord {
    std::string dev_eui;
    std::uint32_t fcnt = 0;
    UnixSeconds received_at = 0;
    int port = 2;
    int rssi_dbm = 0;
    double snr_db = 0.0;
    std::optional<std::string> square_id;
    SensorFrame frame;

    /// Interval i starts at received_at - (4 - i) * interval_s.
    [[nodiscard]] std::array<IntervalRow, kIntervalsPerFrame> intervals(int interval_s = kDefaultIntervalS) const;

    friend bool operator==(const MeasurementRecord &, const MeasurementRecord &) = default;
};

void to_json(nlohmann::json &j, const MeasurementRecord &r);

} // namespace urbansense
