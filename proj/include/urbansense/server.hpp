#pragma once

#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "urbansense/envelope.hpp"
#include "urbansense/geo.hpp"
#include "urbansense/measurement.hpp"
#include "urbansense/reference.hpp"
#include "urbansense/store.hpp"

namespace urbansense {

enum class IngestStatus { Created, Duplicate, Rejected };

struct IngestResult {
    IngestStatus status = IngestStatus::Created;
    std::string detail; ///< error kind and message for rejections
};

struct SquareSummary {
    std::string square_id;
    std::string date;
    std::uint64_t frames = 0;
    int sitting_min_total = 0;
    std::optional<double> noise_db_mean;
    std::optional<double> temperature_c_min;
    std::optional<double> temperature_c_max;
};

void to_json(nlohmann::json &j, const DeviceInfo &d);
void to_json(nlohmann::json &j, const SquareSummary &s);

/// Back end: decode, persist, geofence, query, export.
///
/// Every public member locks one mutex, so ingestion is serialized (and
/// therefore ordered per device) and queries see a consistent snapshot.
class NetworkServer {
public:
    explicit NetworkServer(MeasurementStore store, int interval_s = kDefaultIntervalS);

    /// Validates, sorts by id and persists. Throws GeometryError.
    void set_squares(std::vector<SquareDefinition> squares);
    [[nodiscard]] std::vector<SquareDefinition> squares() const;

    /// Throws the codec error (LengthError, UnknownLayoutError, RangeError,
    /// HexError) for an undecodable payload.
    IngestResult ingest_uplink(const UplinkEnvelope &env);
    /// One transaction; undecodable envelopes come back as Rejected.
    std::vector<IngestResult> ingest_batch(std::span<const UplinkEnvelope> envs);

    /// Updates the device's square from a fix. A fix without position
    /// leaves the assignment as it was; outside every square marks the
    /// device unlocated. Overlapping squares resolve to the lowest id.
    std::optional<std::string> assign_square(const std::string &dev_eui, const GeoPosition &fix);

    /// Throws NotFound for an unknown device or square, ParamError if from > to.
    std::vector<MeasurementRecord> query_device(const std::string &dev_eui, UnixSeconds from, UnixSeconds to) const;
    std::vector<MeasurementRecord> query_square(const std::string &square_id, UnixSeconds from, UnixSeconds to) const;
    std::vector<MeasurementRecord> records(UnixSeconds from = INT64_MIN, UnixSeconds to = INT64_MAX) const;

    std::string export_csv(UnixSeconds from = INT64_MIN, UnixSeconds to = INT64_MAX) const;

    [[nodiscard]] std::vector<DeviceInfo> devices() const;
    [[nodiscard]] std::optional<DeviceInfo> device(const std::string &dev_eui) const;
    [[nodiscard]] std::uint64_t record_count() const;

    /// Per-day totals over intervals starting on `date` (UTC).
    SquareSummary square_summary(const std::string &square_id, const std::string &date) const;

    void set_reference(const ReferenceSeries &ref);
    [[nodiscard]] ReferenceSeries reference() const;

    [[nodiscard]] int interval_s() const { return interval_s_; }

    /// Receives one line per notable event (device registration, assignment).
    std::function<void(const std::string &)> log;

private:
    IngestResult ingest_locked(const UplinkEnvelope &env);
    std::optional<std::string> assign_locked(DeviceInfo &dev, const GeoPosition &fix);
    void emit(const std::string &line) const;

    mutable std::mutex mutex_;
    MeasurementStore store_;
    std::vector<SquareDefinition> squares_;
    int interval_s_;
};

} // namespace urbansense
