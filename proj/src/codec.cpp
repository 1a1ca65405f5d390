#include "urbansense/codec.hpp"

#include <string>

#include "urbansense/errors.hpp"

namespace urbansense {

namespace {

class Writer {
public:
    explicit Writer(FrameBytes &out) : out_(out) {}
    void u8(std::uint8_t v) { out_[pos_++] = v; }
    void u16(std::uint16_t v) {
        u8(static_cast<std::uint8_t>(v >> 8));
        u8(static_cast<std::uint8_t>(v));
    }
    void u32(std::uint32_t v) {
        u16(static_cast<std::uint16_t>(v >> 16));
        u16(static_cast<std::uint16_t>(v));
    }
    [[nodiscard]] std::size_t pos() const { return pos_; }

private:
    FrameBytes &out_;
    std::size_t pos_ = 0;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t, kFrameSize> in) : in_(in) {}
    std::uint8_t u8() { return in_[pos_++]; }
    std::uint16_t u16() {
        const auto hi = u8();
        return static_cast<std::uint16_t>((hi << 8) | u8());
    }
    std::uint32_t u32() {
        const std::uint32_t hi = u16();
        return (hi << 16) | u16();
    }

private:
    std::span<const std::uint8_t, kFrameSize> in_;
    std::size_t pos_ = 0;
};

// Returns the name of the first violated field, or nullptr.
const char *first_violation(const SensorFrame &f) {
    if (f.header != kLayoutV1) return "header";
    if ((f.debug & debug_bits::kReservedMask) != 0) return "debug";
    const auto &p = f.position;
    if (p.latitude_e7 < -GeoPosition::kMaxLatE7 || p.latitude_e7 > GeoPosition::kMaxLatE7) return "latitude";
    if (p.longitude_e7 < -GeoPosition::kMaxLonE7 || p.longitude_e7 > GeoPosition::kMaxLonE7) return "longitude";
    if (!p.has_fix() && (p.latitude_e7 != 0 || p.longitude_e7 != 0)) return "accuracy";
    if (f.battery_pct > 100 && f.battery_pct != kInvalidByte) return "battery_pct";
    if (f.humidity_cRH > kMaxHumidityCRH) return "humidity_cRH";
    for (auto s : f.sitting_min) {
        if (s > kMaxSittingMin && s != kInvalidByte) return "sitting_min";
    }
    for (auto n : f.noise_db) {
        if (n > kMaxNoiseDb && n != kInvalidByte) return "noise_db";
    }
    return nullptr;
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

FrameBytes encode_frame(const SensorFrame &f) {
    if (const char *field = first_violation(f)) throw EncodeError(field, "value out of range");

    FrameBytes out{};
    Writer w(out);
    w.u8(f.header);
    w.u8(f.debug);
    w.u32(static_cast<std::uint32_t>(f.position.latitude_e7));
    w.u32(static_cast<std::uint32_t>(f.position.longitude_e7));
    w.u32(f.position.fix_time_s);
    w.u16(f.position.accuracy_dm);
    w.u8(f.battery_pct);
    w.u16(static_cast<std::uint16_t>(f.temperature_cC));
    w.u16(f.humidity_cRH);
    for (auto s : f.sitting_min) w.u8(s);
    for (auto n : f.noise_db) w.u8(n);
    return out;
}

SensorFrame decode_frame(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != kFrameSize) {
        throw LengthError("frame must be " + std::to_string(kFrameSize) + " bytes, got " +
                          std::to_string(bytes.size()));
    }
    Reader r(bytes.first<kFrameSize>());
    SensorFrame f;
    f.header = r.u8();
    if (f.header != kLayoutV1) throw UnknownLayoutError("unknown payload layout " + std::to_string(f.header));
    f.debug = r.u8();
    f.position.latitude_e7 = static_cast<std::int32_t>(r.u32());
    f.position.longitude_e7 = static_cast<std::int32_t>(r.u32());
    f.position.fix_time_s = r.u32();
    f.position.accuracy_dm = r.u16();
    f.battery_pct = r.u8();
    f.temperature_cC = static_cast<std::int16_t>(r.u16());
    f.humidity_cRH = r.u16();
    for (auto &s : f.sitting_min) s = r.u8();
    for (auto &n : f.noise_db) n = r.u8();
    if (const char *field = first_violation(f)) throw RangeError(field, "value out of range");
    return f;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0x0F]);
    }
    return out;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw HexError("odd number of hex digits");
    std::vector<std::uint8_t> out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        const int hi = hex_value(hex[i]);
        const int lo = hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0) throw HexError("invalid hex digit at offset " + std::to_string(hi < 0 ? i : i + 1));
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

std::string encode_frame_hex(const SensorFrame &frame) { return to_hex(encode_frame(frame)); }

SensorFrame decode_frame_hex(std::string_view hex) { return decode_frame(from_hex(hex)); }

void to_json(nlohmann::json &j, const SensorFrame &f) {
    j = nlohmann::json{
        {"header", f.header},
        {"debug", f.debug},
        {"latitude_e7", f.position.latitude_e7},
        {"longitude_e7", f.position.longitude_e7},
        {"fix_time_s", f.position.fix_time_s},
        {"accuracy_dm", f.position.accuracy_dm},
        {"battery_pct", f.battery_pct},
        {"temperature_cC", f.temperature_cC},
        {"humidity_cRH", f.humidity_cRH},
        {"sitting_min", f.sitting_min},
        {"noise_db", f.noise_db},
    };
}

void from_json(const nlohmann::json &j, SensorFrame &f) {
    SensorFrame out;
    out.header = j.value("header", kLayoutV1);
    out.debug = j.value("debug", std::uint8_t{0});
    out.position.latitude_e7 = j.value("latitude_e7", std::int32_t{0});
    out.position.longitude_e7 = j.value("longitude_e7", std::int32_t{0});
    out.position.fix_time_s = j.value("fix_time_s", std::uint32_t{0});
    out.position.accuracy_dm = j.value("accuracy_dm", GeoPosition::kNoFix);
    out.battery_pct = j.value("battery_pct", kInvalidByte);
    out.temperature_cC = j.value("temperature_cC", std::int16_t{0});
    out.humidity_cRH = j.value("humidity_cRH", std::uint16_t{0});
    if (j.contains("sitting_min")) j.at("sitting_min").get_to(out.sitting_min);
    if (j.contains("noise_db")) j.at("noise_db").get_to(out.noise_db);
    f = out;
}

} // namespace urbansense
