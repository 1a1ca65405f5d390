#include "urbansense/measurement.hpp"

namespace urbansense {

std::array<IntervalRow, kIntervalsPerFrame> MeasurementRecord::intervals(int interval_s) const {
    std::array<IntervalRow, kIntervalsPerFrame> rows{};
    for (std::size_t i = 0; i < kIntervalsPerFrame; ++i) {
        rows[i].interval_start = received_at - static_cast<UnixSeconds>(kIntervalsPerFrame - i) * interval_s;
        rows[i].sitting_min = frame.sitting_min[i];
        rows[i].noise_db = frame.noise_db[i];
    }
    return rows;
}

void to_json(nlohmann::json &j, const MeasurementRecord &r) {
    const auto &f = r.frame;
    const auto opt_byte = [](std::uint8_t v) { return v == kInvalidByte ? nlohmann::json() : nlohmann::json(v); };
    nlohmann::json intervals = nlohmann::json::array();
    for (const auto &row : r.intervals()) {
        intervals.push_back({{"interval_start", format_rfc3339(row.interval_start)},
                             {"sitting_min", opt_byte(row.sitting_min)},
                             {"noise_db", opt_byte(row.noise_db)}});
    }
    j = nlohmann::json{
        {"dev_eui", r.dev_eui},
        {"fcnt", r.fcnt},
        {"received_at", format_rfc3339(r.received_at)},
        {"port", r.port},
        {"rssi_dbm", r.rssi_dbm},
        {"snr_db", r.snr_db},
        {"square_id", r.square_id ? nlohmann::json(*r.square_id) : nlohmann::json()},
        {"header", f.header},
        {"debug", f.debug},
        {"battery_pct", opt_byte(f.battery_pct)},
        {"temperature_c", f.temperature_cC / 100.0},
        {"humidity_rh", f.humidity_cRH / 100.0},
        {"intervals", intervals},
    };
    if (f.position.has_fix()) {
        j["position"] = {{"lat", f.position.latitude_deg()},
                         {"lon", f.position.longitude_deg()},
                         {"accuracy_m", f.position.accuracy_dm / 10.0},
                         {"fix_time", format_rfc3339(f.position.fix_time_s)}};
    } else {
        j["position"] = nullptr;
    }
}

} // namespace urbansense
