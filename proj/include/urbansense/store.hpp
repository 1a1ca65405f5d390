#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "urbansense/geo.hpp"
#include "urbansense/measurement.hpp"
#include "urbansense/reference.hpp"

struct sqlite3;

namespace urbansense {

enum class Location { Unknown, Located, Unlocated };

std::string_view location_name(Location l);

struct DeviceInfo {
    std::string dev_eui;
    std::string label;
    UnixSeconds first_seen = 0;
    UnixSeconds last_seen = 0;
    std::optional<std::string> square_id;
    Location location = Location::Unknown;
    std::optional<std::uint8_t> battery_pct;
    std::uint64_t frames = 0;

    friend bool operator==(const DeviceInfo &, const DeviceInfo &) = default;
};

struct RecordFilter {
    std::optional<std::string> dev_eui;
    std::optional<std::string> square_id;
    UnixSeconds from = INT64_MIN; ///< inclusive
    UnixSeconds to = INT64_MAX;   ///< exclusive
};

/// SQLite-backed persistence. One connection; callers serialize access.
class MeasurementStore {
public:
    /// ":memory:" opens a private in-memory database.
    explicit MeasurementStore(const std::string &path = ":memory:");
    ~MeasurementStore();
    MeasurementStore(MeasurementStore &&other) noexcept;
    MeasurementStore &operator=(MeasurementStore &&other) noexcept;
    MeasurementStore(const MeasurementStore &) = delete;
    MeasurementStore &operator=(const MeasurementStore &) = delete;

    /// False when (dev_eui, fcnt) already exists.
    bool insert_record(const MeasurementRecord &r);
    [[nodiscard]] bool has_record(const std::string &dev_eui, std::uint32_t fcnt) const;
    /// Ordered by (received_at, dev_eui, fcnt).
    [[nodiscard]] std::vector<MeasurementRecord> records(const RecordFilter &filter = {}) const;
    [[nodiscard]] std::uint64_t record_count() const;

    void upsert_device(const DeviceInfo &d);
    [[nodiscard]] std::optional<DeviceInfo> device(const std::string &dev_eui) const;
    [[nodiscard]] std::vector<DeviceInfo> devices() const;

    void save_squares(const std::vector<SquareDefinition> &squares);
    [[nodiscard]] std::vector<SquareDefinition> load_squares() const;

    void save_reference(const ReferenceSeries &ref);
    [[nodiscard]] ReferenceSeries load_reference() const;

    void begin();
    void commit();
    void rollback();

    [[nodiscard]] const std::string &path() const { return path_; }

private:
    void exec(const char *sql);
    sqlite3 *db_ = nullptr;
    std::string path_;
};

/// Commits on `commit()`, rolls back otherwise.
class StoreTransaction {
public:
    explicit StoreTransaction(MeasurementStore &store) : store_(&store) { store_->begin(); }
    ~StoreTransaction() {
        if (store_ != nullptr) {
            try {
                store_->rollback();
            } catch (...) {
            }
        }
    }
    StoreTransaction(const StoreTransaction &) = delete;
    StoreTransaction &operator=(const StoreTransaction &) = delete;
    void commit() {
        store_->commit();
        store_ = nullptr;
    }

private:
    MeasurementStore *store_;
};

} // namespace urbansense
