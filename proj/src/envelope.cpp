#include "urbansense/envelope.hpp"

#include "urbansense/errors.hpp"
#include "urbansense/geo.hpp"

namespace urbansense {

void to_json(nlohmann::json &j, const UplinkEnvelope &env) {
    j = nlohmann::json{
        {"dev_eui", env.dev_eui},
        {"fcnt", env.fcnt},
        {"port", env.port},
        {"payload_hex", env.payload_hex},
        {"rssi_dbm", env.rssi_dbm},
        {"snr_db", env.snr_db},
        {"received_at", format_rfc3339(env.received_at)},
    };
}

void from_json(const nlohmann::json &j, UplinkEnvelope &env) {
    if (!j.is_object()) throw ParamError("envelope must be a JSON object");
    for (const char *key : {"dev_eui", "fcnt", "payload_hex", "received_at"}) {
        if (!j.contains(key)) throw ParamError(std::string("missing field '") + key + "'");
    }
    UplinkEnvelope out;
    try {
        out.dev_eui = normalize_dev_eui(j.at("dev_eui").get<std::string>());
        const auto fcnt = j.at("fcnt").get<std::int64_t>();
        if (fcnt < 0 || fcnt > 0xFFFFFFFFLL) throw ParamError("fcnt must be an unsigned 32-bit value");
        out.fcnt = static_cast<std::uint32_t>(fcnt);
        out.port = j.value("port", 2);
        if (out.port < 1 || out.port > 223) throw ParamError("port must be in [1, 223]");
        out.payload_hex = j.at("payload_hex").get<std::string>();
        out.rssi_dbm = j.value("rssi_dbm", 0);
        out.snr_db = j.value("snr_db", 0.0);
        out.received_at = parse_rfc3339(j.at("received_at").get<std::string>());
    } catch (const nlohmann::json::exception &e) {
        throw ParamError(std::string("envelope field has the wrong type: ") + e.what());
    }
    env = std::move(out);
}

} // namespace urbansense
