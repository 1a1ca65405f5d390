#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "urbansense/time.hpp"

namespace urbansense {

/// Gateway-style metadata wrapping one raw uplink payload.
struct UplinkEnvelope {
    std::string dev_eui;
    std::uint32_t fcnt = 0;
    int port = 2;
    std::string payload_hex; ///< 58 lowercase hex chars
    int rssi_dbm = 0;
    double snr_db = 0.0;
    UnixSeconds received_at = 0;

    friend bool operator==(const UplinkEnvelope &, const UplinkEnvelope &) = default;
};

/// received_at is rendered as RFC3339. from_json validates structure and
/// DevEUI/port ranges but leaves payload decoding to the server.
void to_json(nlohmann::json &j, const UplinkEnvelope &env);
void from_json(const nlohmann::json &j, UplinkEnvelope &env);

} // namespace urbansense
