#include "urbansense/server.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "urbansense/codec.hpp"
#include "urbansense/csv.hpp"
#include "urbansense/errors.hpp"

namespace urbansense {

void to_json(nlohmann::json &j, const DeviceInfo &d) {
    j = nlohmann::json{
        {"dev_eui", d.dev_eui},
        {"label", d.label},
        {"first_seen", format_rfc3339(d.first_seen)},
        {"last_seen", format_rfc3339(d.last_seen)},
        {"square_id", d.square_id ? nlohmann::json(*d.square_id) : nlohmann::json()},
        {"location", location_name(d.location)},
        {"battery_pct", d.battery_pct ? nlohmann::json(*d.battery_pct) : nlohmann::json()},
        {"frames", d.frames},
    };
}

void to_json(nlohmann::json &j, const SquareSummary &s) {
    const auto opt = [](const std::optional<double> &v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
    j = nlohmann::json{
        {"square_id", s.square_id},
        {"date", s.date},
        {"frames", s.frames},
        {"sitting_min_total", s.sitting_min_total},
        {"noise_db_mean", opt(s.noise_db_mean)},
        {"temperature_c_min", opt(s.temperature_c_min)},
        {"temperature_c_max", opt(s.temperature_c_max)},
    };
}

NetworkServer::NetworkServer(MeasurementStore store, int interval_s)
    : store_(std::move(store)), interval_s_(interval_s) {
    if (interval_s_ <= 0) throw ParamError("interval_s must be positive");
    squares_ = store_.load_squares();
}

void NetworkServer::emit(const std::string &line) const {
    if (log) log(line);
}

void NetworkServer::set_squares(std::vector<SquareDefinition> squares) {
    std::set<std::string> ids;
    for (const auto &sq : squares) {
        validate_square(sq);
        if (!ids.insert(sq.id).second) throw GeometryError("duplicate square id '" + sq.id + "'");
    }
    std::sort(squares.begin(), squares.end(), [](const auto &a, const auto &b) { return a.id < b.id; });
    std::lock_guard lock(mutex_);
    StoreTransaction tx(store_);
    store_.save_squares(squares);
    tx.commit();
    squares_ = std::move(squares);
}

std::vector<SquareDefinition> NetworkServer::squares() const {
    std::lock_guard lock(mutex_);
    return squares_;
}

std::optional<std::string> NetworkServer::assign_locked(DeviceInfo &dev, const GeoPosition &fix) {
    if (!fix.has_fix()) return dev.square_id;
    for (const auto &sq : squares_) {
        if (point_in_polygon(fix, sq.boundary)) {
            if (dev.square_id != sq.id) emit("device " + dev.dev_eui + " assigned to square " + sq.id);
            dev.square_id = sq.id;
            dev.location = Location::Located;
            return dev.square_id;
        }
    }
    if (dev.location != Location::Unlocated) emit("device " + dev.dev_eui + " is outside every square");
    dev.square_id.reset();
    dev.location = Location::Unlocated;
    return std::nullopt;
}

std::optional<std::string> NetworkServer::assign_square(const std::string &dev_eui, const GeoPosition &fix) {
    std::lock_guard lock(mutex_);
    auto dev = store_.device(normalize_dev_eui(dev_eui));
    if (!dev) throw NotFound("unknown device " + dev_eui);
    auto out = assign_locked(*dev, fix);
    store_.upsert_device(*dev);
    return out;
}

IngestResult NetworkServer::ingest_locked(const UplinkEnvelope &env) {
    const std::string eui = normalize_dev_eui(env.dev_eui);
    if (env.port < 1 || env.port > 223) throw ParamError("port must be in [1, 223]");
    const SensorFrame frame = decode_frame_hex(env.payload_hex);

    if (store_.has_record(eui, env.fcnt)) return {IngestStatus::Duplicate, {}};

    auto dev = store_.device(eui);
    if (!dev) {
        dev = DeviceInfo{eui, eui, env.received_at, env.received_at, std::nullopt, Location::Unknown, std::nullopt, 0};
        emit("registered device " + eui);
    }
    assign_locked(*dev, frame.position);

    MeasurementRecord rec;
    rec.dev_eui = eui;
    rec.fcnt = env.fcnt;
    rec.received_at = env.received_at;
    rec.port = env.port;
    rec.rssi_dbm = env.rssi_dbm;
    rec.snr_db = env.snr_db;
    rec.square_id = dev->square_id;
    rec.frame = frame;
    store_.insert_record(rec);

    if (env.received_at >= dev->last_seen) {
        dev->last_seen = env.received_at;
        if (frame.battery_pct != kInvalidByte) dev->battery_pct = frame.battery_pct;
    }
    dev->first_seen = std::min(dev->first_seen, env.received_at);
    ++dev->frames;
    store_.upsert_device(*dev);
    return {IngestStatus::Created, {}};
}

IngestResult NetworkServer::ingest_uplink(const UplinkEnvelope &env) {
    std::lock_guard lock(mutex_);
    StoreTransaction tx(store_);
    auto result = ingest_locked(env);
    tx.commit();
    return result;
}

std::vector<IngestResult> NetworkServer::ingest_batch(std::span<const UplinkEnvelope> envs) {
    std::lock_guard lock(mutex_);
    std::vector<IngestResult> out;
    out.reserve(envs.size());
    StoreTransaction tx(store_);
    for (const auto &env : envs) {
        try {
            out.push_back(ingest_locked(env));
        } catch (const Error &e) {
            out.push_back({IngestStatus::Rejected, std::string(e.kind()) + ": " + e.what()});
        }
    }
    tx.commit();
    return out;
}

std::vector<MeasurementRecord> NetworkServer::query_device(const std::string &dev_eui, UnixSeconds from,
                                                           UnixSeconds to) const {
    if (from > to) throw ParamError("from must not be after to");
    std::lock_guard lock(mutex_);
    const std::string eui = normalize_dev_eui(dev_eui);
    if (!store_.device(eui)) throw NotFound("unknown device " + dev_eui);
    return store_.records({eui, std::nullopt, from, to});
}

std::vector<MeasurementRecord> NetworkServer::query_square(const std::string &square_id, UnixSeconds from,
                                                           UnixSeconds to) const {
    if (from > to) throw ParamError("from must not be after to");
    std::lock_guard lock(mutex_);
    if (std::none_of(squares_.begin(), squares_.end(), [&](const auto &sq) { return sq.id == square_id; })) {
        throw NotFound("unknown square " + square_id);
    }
    return store_.records({std::nullopt, square_id, from, to});
}

std::vector<MeasurementRecord> NetworkServer::records(UnixSeconds from, UnixSeconds to) const {
    if (from > to) throw ParamError("from must not be after to");
    std::lock_guard lock(mutex_);
    return store_.records({std::nullopt, std::nullopt, from, to});
}

std::string NetworkServer::export_csv(UnixSeconds from, UnixSeconds to) const {
    const auto recs = records(from, to);
    return urbansense::export_csv(recs, interval_s_);
}

std::vector<DeviceInfo> NetworkServer::devices() const {
    std::lock_guard lock(mutex_);
    return store_.devices();
}

std::optional<DeviceInfo> NetworkServer::device(const std::string &dev_eui) const {
    std::lock_guard lock(mutex_);
    return store_.device(normalize_dev_eui(dev_eui));
}

std::uint64_t NetworkServer::record_count() const {
    std::lock_guard lock(mutex_);
    return store_.record_count();
}

SquareSummary NetworkServer::square_summary(const std::string &square_id, const std::string &date) const {
    const UnixSeconds day = parse_date(date);
    const UnixSeconds span = static_cast<UnixSeconds>(kIntervalsPerFrame) * interval_s_;
    const auto recs = query_square(square_id, day, day + kSecondsPerDay + span);

    SquareSummary s;
    s.square_id = square_id;
    s.date = format_date(day);
    double noise_sum = 0.0;
    int noise_n = 0;
    for (const auto &r : recs) {
        bool any = false;
        const auto rows = r.intervals(interval_s_);
        for (const auto &row : rows) {
            if (day_start(row.interval_start) != day) continue;
            any = true;
            if (row.sitting_min != kInvalidByte) s.sitting_min_total += row.sitting_min;
            if (row.noise_db != kInvalidByte) {
                noise_sum += row.noise_db;
                ++noise_n;
            }
        }
        // Temperature belongs to the last interval of the frame.
        if (day_start(rows.back().interval_start) == day) {
            const double t = r.frame.temperature_cC / 100.0;
            s.temperature_c_min = std::min(s.temperature_c_min.value_or(t), t);
            s.temperature_c_max = std::max(s.temperature_c_max.value_or(t), t);
        }
        if (any) ++s.frames;
    }
    if (noise_n > 0) s.noise_db_mean = noise_sum / noise_n;
    return s;
}

void NetworkServer::set_reference(const ReferenceSeries &ref) {
    ref.validate();
    std::lock_guard lock(mutex_);
    StoreTransaction tx(store_);
    store_.save_reference(ref);
    tx.commit();
}

ReferenceSeries NetworkServer::reference() const {
    std::lock_guard lock(mutex_);
    return store_.load_reference();
}

} // namespace urbansense
