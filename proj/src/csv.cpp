#include "urbansense/csv.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <optional>
#include <tuple>

#include "urbansense/errors.hpp"

namespace urbansense {

namespace {

constexpr std::size_t kRequiredColumns = 13;

std::string fixed(std::int64_t value, int decimals) {
    std::int64_t scale = 1;
    for (int i = 0; i < decimals; ++i) scale *= 10;
    const bool neg = value < 0;
    const std::uint64_t mag = neg ? 0 - static_cast<std::uint64_t>(value) : static_cast<std::uint64_t>(value);
    std::string frac = std::to_string(mag % static_cast<std::uint64_t>(scale));
    frac.insert(0, static_cast<std::size_t>(decimals) - frac.size(), '0');
    return (neg ? "-" : "") + std::to_string(mag / static_cast<std::uint64_t>(scale)) + "." + frac;
}

std::int64_t parse_fixed(std::string_view s, int decimals, std::string_view column) {
    const auto fail = [&] { return CsvError("column " + std::string(column) + ": bad number '" + std::string(s) + "'"); };
    if (s.empty()) throw fail();
    bool neg = false;
    if (s.front() == '-' || s.front() == '+') {
        neg = s.front() == '-';
        s.remove_prefix(1);
    }
    const auto dot = s.find('.');
    const std::string_view whole = s.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
    if (whole.empty() || frac.size() > static_cast<std::size_t>(decimals)) throw fail();
    std::int64_t v = 0;
    for (char c : whole) {
        if (c < '0' || c > '9') throw fail();
        v = v * 10 + (c - '0');
    }
    for (int i = 0; i < decimals; ++i) {
        const char c = static_cast<std::size_t>(i) < frac.size() ? frac[static_cast<std::size_t>(i)] : '0';
        if (c < '0' || c > '9') throw fail();
        v = v * 10 + (c - '0');
    }
    return neg ? -v : v;
}

std::int64_t parse_int(std::string_view s, std::string_view column) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw CsvError("column " + std::string(column) + ": bad integer '" + std::string(s) + "'");
    }
    return v;
}

double parse_double(std::string_view s, std::string_view column) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw CsvError("column " + std::string(column) + ": bad number '" + std::string(s) + "'");
    }
    return v;
}

std::string shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string opt_byte(std::uint8_t v) { return v == kInvalidByte ? std::string() : std::to_string(v); }

std::uint8_t parse_opt_byte(std::string_view s, std::string_view column) {
    if (s.empty()) return kInvalidByte;
    const auto v = parse_int(s, column);
    if (v < 0 || v > 254) throw CsvError("column " + std::string(column) + ": out of range");
    return static_cast<std::uint8_t>(v);
}

} // namespace

std::string csv_field(std::string_view value) {
    if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t i = 0;
    const auto end_row = [&] {
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        field_started = false;
    };
    while (i < text.size()) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                    continue;
                }
                quoted = false;
            } else {
                field += c;
            }
            ++i;
            continue;
        }
        if (c == '"') {
            if (!field.empty()) throw CsvError("quote inside unquoted field");
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            field_started = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            end_row();
        } else {
            field += c;
            field_started = true;
        }
        ++i;
    }
    if (quoted) throw CsvError("unterminated quoted field");
    if (field_started || !row.empty()) end_row();
    return rows;
}

std::string export_csv(std::span<const MeasurementRecord> records, int interval_s) {
    std::string out;
    for (std::size_t i = 0; i < std::size(kExportColumns); ++i) {
        if (i) out += ',';
        out += kExportColumns[i];
    }
    out += "\r\n";
    for (const auto &r : records) {
        const auto &f = r.frame;
        const bool fix = f.position.has_fix();
        for (const auto &row : r.intervals(interval_s)) {
            const std::string cols[] = {
                csv_field(r.dev_eui),
                csv_field(r.square_id.value_or("")),
                format_rfc3339(r.received_at),
                format_rfc3339(row.interval_start),
                opt_byte(row.sitting_min),
                opt_byte(row.noise_db),
                fixed(f.temperature_cC, 2),
                fixed(f.humidity_cRH, 2),
                opt_byte(f.battery_pct),
                fix ? fixed(f.position.latitude_e7, 7) : std::string(),
                fix ? fixed(f.position.longitude_e7, 7) : std::string(),
                fix ? fixed(f.position.accuracy_dm, 1) : std::string(),
                std::to_string(r.fcnt),
                std::to_string(f.header),
                std::to_string(f.debug),
                std::to_string(f.position.fix_time_s),
                std::to_string(r.port),
                std::to_string(r.rssi_dbm),
                shortest(r.snr_db),
            };
            for (std::size_t i = 0; i < std::size(cols); ++i) {
                if (i) out += ',';
                out += cols[i];
            }
            out += "\r\n";
        }
    }
    return out;
}

std::vector<MeasurementRecord> import_csv(std::string_view text, int interval_s) {
    const auto rows = parse_csv(text);
    if (rows.empty()) throw CsvError("missing header row");
    const auto &header = rows.front();
    if (header.size() < kRequiredColumns || header.size() > std::size(kExportColumns)) {
        throw CsvError("unexpected column count " + std::to_string(header.size()));
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] != kExportColumns[i]) throw CsvError("unexpected column '" + header[i] + "'");
    }
    const std::size_t ncols = header.size();

    struct Partial {
        MeasurementRecord rec;
        std::array<bool, kIntervalsPerFrame> seen{};
    };
    std::map<std::pair<std::string, std::uint32_t>, Partial> byKey;

    for (std::size_t n = 1; n < rows.size(); ++n) {
        const auto &row = rows[n];
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != ncols) throw CsvError("row " + std::to_string(n + 1) + ": wrong field count");
        const auto col = [&](std::size_t i) -> std::string_view { return row[i]; };
        const auto opt = [&](std::size_t i) -> std::optional<std::string_view> {
            if (i < ncols) return row[i];
            return std::nullopt;
        };

        MeasurementRecord r;
        r.dev_eui = row[0];
        if (!row[1].empty()) r.square_id = row[1];
        try {
            r.received_at = parse_rfc3339(col(2));
        } catch (const TimeFormatError &e) {
            throw CsvError("row " + std::to_string(n + 1) + ": " + e.what());
        }
        const UnixSeconds start = parse_rfc3339(col(3));
        const auto fcnt = parse_int(col(12), "fcnt");
        if (fcnt < 0 || fcnt > 0xFFFFFFFFLL) throw CsvError("column fcnt: out of range");
        r.fcnt = static_cast<std::uint32_t>(fcnt);

        auto &f = r.frame;
        f.temperature_cC = static_cast<std::int16_t>(parse_fixed(col(6), 2, "temperature_c"));
        f.humidity_cRH = static_cast<std::uint16_t>(parse_fixed(col(7), 2, "humidity_rh"));
        f.battery_pct = parse_opt_byte(col(8), "battery_pct");
        if (col(9).empty()) {
            f.position = GeoPosition::no_fix();
        } else {
            f.position.latitude_e7 = static_cast<std::int32_t>(parse_fixed(col(9), 7, "lat"));
            f.position.longitude_e7 = static_cast<std::int32_t>(parse_fixed(col(10), 7, "lon"));
            f.position.accuracy_dm = static_cast<std::uint16_t>(parse_fixed(col(11), 1, "accuracy_m"));
        }
        if (auto v = opt(13)) f.header = static_cast<std::uint8_t>(parse_int(*v, "header"));
        if (auto v = opt(14)) f.debug = static_cast<std::uint8_t>(parse_int(*v, "debug"));
        if (auto v = opt(15)) f.position.fix_time_s = static_cast<std::uint32_t>(parse_int(*v, "fix_time"));
        if (auto v = opt(16)) r.port = static_cast<int>(parse_int(*v, "port"));
        if (auto v = opt(17)) r.rssi_dbm = static_cast<int>(parse_int(*v, "rssi_dbm"));
        if (auto v = opt(18)) r.snr_db = parse_double(*v, "snr_db");

        const UnixSeconds back = r.received_at - start;
        if (back <= 0 || back % interval_s != 0 || back / interval_s > static_cast<UnixSeconds>(kIntervalsPerFrame)) {
            throw CsvError("row " + std::to_string(n + 1) + ": interval_start does not line up with received_at");
        }
        const auto idx = kIntervalsPerFrame - static_cast<std::size_t>(back / interval_s);
        const auto sitting = parse_opt_byte(col(4), "sitting_min");
        const auto noise = parse_opt_byte(col(5), "noise_db");

        auto [it, fresh] = byKey.try_emplace({r.dev_eui, r.fcnt});
        auto &part = it->second;
        if (fresh) {
            part.rec = r;
        } else {
            auto a = part.rec;
            a.frame.sitting_min = r.frame.sitting_min;
            a.frame.noise_db = r.frame.noise_db;
            if (!(a == r)) throw CsvError("row " + std::to_string(n + 1) + ": inconsistent frame fields");
        }
        if (part.seen[idx]) throw CsvError("row " + std::to_string(n + 1) + ": duplicate interval");
        part.seen[idx] = true;
        part.rec.frame.sitting_min[idx] = sitting;
        part.rec.frame.noise_db[idx] = noise;
    }

    std::vector<MeasurementRecord> out;
    out.reserve(byKey.size());
    for (auto &[key, part] : byKey) {
        if (!std::all_of(part.seen.begin(), part.seen.end(), [](bool b) { return b; })) {
            throw CsvError("frame " + key.first + "/" + std::to_string(key.second) + " is missing intervals");
        }
        out.push_back(std::move(part.rec));
    }
    std::sort(out.begin(), out.end(), [](const MeasurementRecord &a, const MeasurementRecord &b) {
        return std::tie(a.received_at, a.dev_eui, a.fcnt) < std::tie(b.received_at, b.dev_eui, b.fcnt);
    });
    return out;
}

} // namespace urbansense
