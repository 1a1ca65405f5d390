#include "urbansense/store.hpp"

#include <sqlite3.h>

#include <json.hpp>
#include <utility>

#include "urbansense/errors.hpp"

namespace urbansense {

namespace {

constexpr const char *kSchema = R"sql(
CREATE TABLE IF NOT EXISTS frames (
    dev_eui TEXT NOT NULL,
    fcnt INTEGER NOT NULL,
    received_at INTEGER NOT NULL,
    port INTEGER NOT NULL,
    rssi_dbm INTEGER NOT NULL,
    snr_db REAL NOT NULL,
    square_id TEXT,
    header INTEGER NOT NULL,
    debug INTEGER NOT NULL,
    lat_e7 INTEGER NOT NULL,
    lon_e7 INTEGER NOT NULL,
    fix_time INTEGER NOT NULL,
    accuracy_dm INTEGER NOT NULL,
    battery_pct INTEGER NOT NULL,
    temperature_cc INTEGER NOT NULL,
    humidity_crh INTEGER NOT NULL,
    sitting0 INTEGER NOT NULL, sitting1 INTEGER NOT NULL, sitting2 INTEGER NOT NULL, sitting3 INTEGER NOT NULL,
    noise0 INTEGER NOT NULL, noise1 INTEGER NOT NULL, noise2 INTEGER NOT NULL, noise3 INTEGER NOT NULL,
    PRIMARY KEY (dev_eui, fcnt)
);
CREATE INDEX IF NOT EXISTS frames_by_time ON frames (received_at, dev_eui, fcnt);
CREATE INDEX IF NOT EXISTS frames_by_square ON frames (square_id, received_at);
CREATE TABLE IF NOT EXISTS devices (
    dev_eui TEXT PRIMARY KEY,
    label TEXT NOT NULL,
    first_seen INTEGER NOT NULL,
    last_seen INTEGER NOT NULL,
    square_id TEXT,
    location INTEGER NOT NULL,
    battery_pct INTEGER,
    frames INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS squares (
    id TEXT PRIMARY KEY,
    name TEXT NOT NULL,
    boundary TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS reference (
    t INTEGER PRIMARY KEY,
    temperature_c REAL NOT NULL,
    raining INTEGER NOT NULL
);
)sql";

constexpr const char *kFrameColumns =
    "dev_eui, fcnt, received_at, port, rssi_dbm, snr_db, square_id, header, debug, lat_e7, lon_e7, fix_time, "
    "accuracy_dm, battery_pct, temperature_cc, humidity_crh, sitting0, sitting1, sitting2, sitting3, "
    "noise0, noise1, noise2, noise3";

class Stmt {
public:
    Stmt(sqlite3 *db, const std::string &sql) : db_(db) {
        if (sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt_, nullptr) != SQLITE_OK) {
            throw StoreError(std::string("prepare failed: ") + sqlite3_errmsg(db));
        }
    }
    ~Stmt() { sqlite3_finalize(stmt_); }
    Stmt(const Stmt &) = delete;
    Stmt &operator=(const Stmt &) = delete;

    Stmt &bind(int i, std::int64_t v) {
        check(sqlite3_bind_int64(stmt_, i, v));
        return *this;
    }
    Stmt &bind(int i, double v) {
        check(sqlite3_bind_double(stmt_, i, v));
        return *this;
    }
    Stmt &bind(int i, const std::string &v) {
        check(sqlite3_bind_text(stmt_, i, v.c_str(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
        return *this;
    }
    Stmt &bind(int i, const std::optional<std::string> &v) {
        if (v) return bind(i, *v);
        check(sqlite3_bind_null(stmt_, i));
        return *this;
    }
    void reset() {
        sqlite3_reset(stmt_);
        sqlite3_clear_bindings(stmt_);
    }
    Stmt &bind_null(int i) {
        check(sqlite3_bind_null(stmt_, i));
        return *this;
    }

    /// True while a row is available.
    bool step() {
        const int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) return true;
        if (rc == SQLITE_DONE) return false;
        throw StoreError(std::string("step failed: ") + sqlite3_errmsg(db_));
    }

    [[nodiscard]] std::int64_t i64(int col) const { return sqlite3_column_int64(stmt_, col); }
    [[nodiscard]] double f64(int col) const { return sqlite3_column_double(stmt_, col); }
    [[nodiscard]] bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }
    [[nodiscard]] std::string text(int col) const {
        const auto *p = sqlite3_column_text(stmt_, col);
        return p ? std::string(reinterpret_cast<const char *>(p), static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
                 : std::string();
    }
    [[nodiscard]] std::optional<std::string> opt_text(int col) const {
        if (is_null(col)) return std::nullopt;
        return text(col);
    }

private:
    void check(int rc) const {
        if (rc != SQLITE_OK) throw StoreError(std::string("bind failed: ") + sqlite3_errmsg(db_));
    }
    sqlite3 *db_;
    sqlite3_stmt *stmt_ = nullptr;
};

MeasurementRecord read_record(const Stmt &s) {
    MeasurementRecord r;
    r.dev_eui = s.text(0);
    r.fcnt = static_cast<std::uint32_t>(s.i64(1));
    r.received_at = s.i64(2);
    r.port = static_cast<int>(s.i64(3));
    r.rssi_dbm = static_cast<int>(s.i64(4));
    r.snr_db = s.f64(5);
    r.square_id = s.opt_text(6);
    auto &f = r.frame;
    f.header = static_cast<std::uint8_t>(s.i64(7));
    f.debug = static_cast<std::uint8_t>(s.i64(8));
    f.position.latitude_e7 = static_cast<std::int32_t>(s.i64(9));
    f.position.longitude_e7 = static_cast<std::int32_t>(s.i64(10));
    f.position.fix_time_s = static_cast<std::uint32_t>(s.i64(11));
    f.position.accuracy_dm = static_cast<std::uint16_t>(s.i64(12));
    f.battery_pct = static_cast<std::uint8_t>(s.i64(13));
    f.temperature_cC = static_cast<std::int16_t>(s.i64(14));
    f.humidity_cRH = static_cast<std::uint16_t>(s.i64(15));
    for (int i = 0; i < 4; ++i) {
        f.sitting_min[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(s.i64(16 + i));
        f.noise_db[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(s.i64(20 + i));
    }
    return r;
}

DeviceInfo read_device(const Stmt &s) {
    DeviceInfo d;
    d.dev_eui = s.text(0);
    d.label = s.text(1);
    d.first_seen = s.i64(2);
    d.last_seen = s.i64(3);
    d.square_id = s.opt_text(4);
    d.location = static_cast<Location>(s.i64(5));
    if (!s.is_null(6)) d.battery_pct = static_cast<std::uint8_t>(s.i64(6));
    d.frames = static_cast<std::uint64_t>(s.i64(7));
    return d;
}

constexpr const char *kDeviceColumns = "dev_eui, label, first_seen, last_seen, square_id, location, battery_pct, frames";

} // namespace

std::string_view location_name(Location l) {
    switch (l) {
    case Location::Unknown:
        return "unknown";
    case Location::Located:
        return "located";
    case Location::Unlocated:
        return "unlocated";
    }
    return "unknown";
}

MeasurementStore::MeasurementStore(const std::string &path) : path_(path) {
    if (sqlite3_open(path.c_str(), &db_) != SQLITE_OK) {
        std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
        sqlite3_close(db_);
        db_ = nullptr;
        throw StoreError("cannot open store '" + path + "': " + msg);
    }
    if (path != ":memory:") {
        exec("PRAGMA journal_mode=WAL;");
        exec("PRAGMA synchronous=NORMAL;");
    }
    exec(kSchema);
}

MeasurementStore::~MeasurementStore() {
    if (db_ != nullptr) sqlite3_close(db_);
}

MeasurementStore::MeasurementStore(MeasurementStore &&other) noexcept
    : db_(std::exchange(other.db_, nullptr)), path_(std::move(other.path_)) {}

MeasurementStore &MeasurementStore::operator=(MeasurementStore &&other) noexcept {
    if (this != &other) {
        if (db_ != nullptr) sqlite3_close(db_);
        db_ = std::exchange(other.db_, nullptr);
        path_ = std::move(other.path_);
    }
    return *this;
}

void MeasurementStore::exec(const char *sql) {
    char *err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown error";
        sqlite3_free(err);
        throw StoreError(msg);
    }
}

void MeasurementStore::begin() { exec("BEGIN IMMEDIATE;"); }
void MeasurementStore::commit() { exec("COMMIT;"); }
void MeasurementStore::rollback() { exec("ROLLBACK;"); }

bool MeasurementStore::insert_record(const MeasurementRecord &r) {
    Stmt s(db_, std::string("INSERT OR IGNORE INTO frames (") + kFrameColumns +
                    ") VALUES (?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?)");
    const auto &f = r.frame;
    s.bind(1, r.dev_eui)
        .bind(2, std::int64_t{r.fcnt})
        .bind(3, r.received_at)
        .bind(4, std::int64_t{r.port})
        .bind(5, std::int64_t{r.rssi_dbm})
        .bind(6, r.snr_db)
        .bind(7, r.square_id)
        .bind(8, std::int64_t{f.header})
        .bind(9, std::int64_t{f.debug})
        .bind(10, std::int64_t{f.position.latitude_e7})
        .bind(11, std::int64_t{f.position.longitude_e7})
        .bind(12, std::int64_t{f.position.fix_time_s})
        .bind(13, std::int64_t{f.position.accuracy_dm})
        .bind(14, std::int64_t{f.battery_pct})
        .bind(15, std::int64_t{f.temperature_cC})
        .bind(16, std::int64_t{f.humidity_cRH});
    for (int i = 0; i < 4; ++i) {
        s.bind(17 + i, std::int64_t{f.sitting_min[static_cast<std::size_t>(i)]});
        s.bind(21 + i, std::int64_t{f.noise_db[static_cast<std::size_t>(i)]});
    }
    s.step();
    return sqlite3_changes(db_) > 0;
}

bool MeasurementStore::has_record(const std::string &dev_eui, std::uint32_t fcnt) const {
    Stmt s(db_, "SELECT 1 FROM frames WHERE dev_eui = ? AND fcnt = ?");
    s.bind(1, dev_eui).bind(2, std::int64_t{fcnt});
    return s.step();
}

std::vector<MeasurementRecord> MeasurementStore::records(const RecordFilter &filter) const {
    std::string sql = std::string("SELECT ") + kFrameColumns + " FROM frames WHERE received_at >= ? AND received_at < ?";
    if (filter.dev_eui) sql += " AND dev_eui = ?";
    if (filter.square_id) sql += " AND square_id = ?";
    sql += " ORDER BY received_at, dev_eui, fcnt";
    Stmt s(db_, sql);
    s.bind(1, filter.from).bind(2, filter.to);
    int i = 3;
    if (filter.dev_eui) s.bind(i++, *filter.dev_eui);
    if (filter.square_id) s.bind(i++, *filter.square_id);
    std::vector<MeasurementRecord> out;
    while (s.step()) out.push_back(read_record(s));
    return out;
}

std::uint64_t MeasurementStore::record_count() const {
    Stmt s(db_, "SELECT COUNT(*) FROM frames");
    s.step();
    return static_cast<std::uint64_t>(s.i64(0));
}

void MeasurementStore::upsert_device(const DeviceInfo &d) {
    Stmt s(db_, std::string("INSERT OR REPLACE INTO devices (") + kDeviceColumns + ") VALUES (?,?,?,?,?,?,?,?)");
    s.bind(1, d.dev_eui)
        .bind(2, d.label)
        .bind(3, d.first_seen)
        .bind(4, d.last_seen)
        .bind(5, d.square_id)
        .bind(6, static_cast<std::int64_t>(d.location));
    if (d.battery_pct) {
        s.bind(7, std::int64_t{*d.battery_pct});
    } else {
        s.bind_null(7);
    }
    s.bind(8, static_cast<std::int64_t>(d.frames));
    s.step();
}

std::optional<DeviceInfo> MeasurementStore::device(const std::string &dev_eui) const {
    Stmt s(db_, std::string("SELECT ") + kDeviceColumns + " FROM devices WHERE dev_eui = ?");
    s.bind(1, dev_eui);
    if (!s.step()) return std::nullopt;
    return read_device(s);
}

std::vector<DeviceInfo> MeasurementStore::devices() const {
    Stmt s(db_, std::string("SELECT ") + kDeviceColumns + " FROM devices ORDER BY dev_eui");
    std::vector<DeviceInfo> out;
    while (s.step()) out.push_back(read_device(s));
    return out;
}

void MeasurementStore::save_squares(const std::vector<SquareDefinition> &squares) {
    exec("DELETE FROM squares;");
    for (const auto &sq : squares) {
        nlohmann::json boundary = nlohmann::json::array();
        for (const auto &v : sq.boundary) boundary.push_back({v.latitude_e7, v.longitude_e7});
        Stmt s(db_, "INSERT INTO squares (id, name, boundary) VALUES (?,?,?)");
        s.bind(1, sq.id).bind(2, sq.name).bind(3, boundary.dump());
        s.step();
    }
}

std::vector<SquareDefinition> MeasurementStore::load_squares() const {
    Stmt s(db_, "SELECT id, name, boundary FROM squares ORDER BY id");
    std::vector<SquareDefinition> out;
    while (s.step()) {
        SquareDefinition sq{s.text(0), s.text(1), {}};
        for (const auto &v : nlohmann::json::parse(s.text(2))) {
            GeoPosition p;
            p.latitude_e7 = v.at(0).get<std::int32_t>();
            p.longitude_e7 = v.at(1).get<std::int32_t>();
            p.accuracy_dm = 0;
            sq.boundary.push_back(p);
        }
        out.push_back(std::move(sq));
    }
    return out;
}

void MeasurementStore::save_reference(const ReferenceSeries &ref) {
    exec("DELETE FROM reference;");
    Stmt s(db_, "INSERT INTO reference (t, temperature_c, raining) VALUES (?,?,?)");
    for (const auto &r : ref.samples) {
        s.reset();
        s.bind(1, r.t).bind(2, r.temperature_c).bind(3, std::int64_t{r.raining ? 1 : 0});
        s.step();
    }
}

ReferenceSeries MeasurementStore::load_reference() const {
    Stmt s(db_, "SELECT t, temperature_c, raining FROM reference ORDER BY t");
    ReferenceSeries ref;
    while (s.step()) ref.samples.push_back({s.i64(0), s.f64(1), s.i64(2) != 0});
    return ref;
}

} // namespace urbansense
