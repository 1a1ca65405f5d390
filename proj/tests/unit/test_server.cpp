#include <doctest.h>

#include <filesystem>
#include <thread>

#include "urbansense/codec.hpp"
#include "urbansense/errors.hpp"
#include "urbansense/server.hpp"

using namespace urbansense;

namespace {

const UnixSeconds kT0 = 1654473600; // 2022-06-06T00:00:00Z

SquareDefinition square(std::string id, double lat, double lon, double half = 0.001) {
    SquareDefinition sq{id, id, {}};
    for (auto [a, b] : {std::pair{-half, -half}, {-half, half}, {half, half}, {half, -half}}) {
        sq.boundary.push_back(GeoPosition::from_degrees(lat + a, lon + b));
    }
    return sq;
}

UplinkEnvelope make(std::uint32_t fcnt, UnixSeconds at, GeoPosition pos = GeoPosition::no_fix(),
                    std::string eui = "70b3d57ed0050001") {
    SensorFrame f;
    f.position = pos;
    f.battery_pct = 90;
    f.temperature_cC = 2000 + static_cast<std::int16_t>(fcnt);
    f.humidity_cRH = 5000;
    f.sitting_min = {1, 2, 3, 4};
    f.noise_db = {50, 52, 54, 56};
    UplinkEnvelope e;
    e.dev_eui = std::move(eui);
    e.fcnt = fcnt;
    e.payload_hex = encode_frame_hex(f);
    e.received_at = at;
    e.rssi_dbm = -100;
    e.snr_db = 7.5;
    return e;
}

void add_squares(NetworkServer &s) { s.set_squares({square("V", 47.51, 8.74), square("M", 47.50, 8.72)}); }

} // namespace

TEST_SUITE("server") {
    TEST_CASE("ingest creates, then deduplicates") {
        NetworkServer s{MeasurementStore{}};
        add_squares(s);
        std::vector<std::string> log;
        s.log = [&](const std::string &l) { log.push_back(l); };
        const auto e = make(0, kT0 + 7200);
        CHECK(s.ingest_uplink(e).status == IngestStatus::Created);
        CHECK(s.record_count() == 1);
        CHECK(s.ingest_uplink(e).status == IngestStatus::Duplicate);
        CHECK(s.record_count() == 1);
        REQUIRE_FALSE(log.empty());
        CHECK(log.front().find("registered") != std::string::npos);
        const auto dev = s.device("70B3D57ED0050001");
        REQUIRE(dev);
        CHECK(dev->frames == 1);
        CHECK(dev->battery_pct == 90);
        CHECK(dev->location == Location::Unknown);
    }

    TEST_CASE("undecodable payloads") {
        NetworkServer s{MeasurementStore{}};
        add_squares(s);
        auto e = make(0, kT0);
        e.payload_hex.resize(56);
        CHECK_THROWS_AS(s.ingest_uplink(e), LengthError);
        const std::vector<UplinkEnvelope> batch{e, make(1, kT0)};
        const auto r = s.ingest_batch(batch);
        CHECK(r[0].status == IngestStatus::Rejected);
        CHECK(r[0].detail.rfind("LengthError", 0) == 0);
        CHECK(r[1].status == IngestStatus::Created);
        CHECK(s.record_count() == 1);
    }

    TEST_CASE("square assignment from fixes") {
        NetworkServer s{MeasurementStore{}};
        add_squares(s);
        const auto in_m = GeoPosition::from_degrees(47.5001, 8.7201, 30);
        s.ingest_uplink(make(0, kT0, in_m));
        CHECK(s.device("70b3d57ed0050001")->square_id == "M");
        CHECK(s.query_device("70b3d57ed0050001", INT64_MIN, INT64_MAX).at(0).square_id == "M");

        // no fix keeps the assignment
        CHECK(s.assign_square("70b3d57ed0050001", GeoPosition::no_fix()) == "M");
        s.ingest_uplink(make(1, kT0 + 7200));
        CHECK(s.records().back().square_id == "M");

        // outside everything: unlocated
        CHECK_FALSE(s.assign_square("70b3d57ed0050001", GeoPosition::from_degrees(0, 0, 10)));
        CHECK(s.device("70b3d57ed0050001")->location == Location::Unlocated);
        CHECK_THROWS_AS(s.assign_square("70b3d57ed0050009", in_m), NotFound);
    }

    TEST_CASE("overlapping squares resolve to the lowest id") {
        NetworkServer s{MeasurementStore{}};
        s.set_squares({square("B", 47.5, 8.72), square("A", 47.5, 8.7205)});
        s.ingest_uplink(make(0, kT0, GeoPosition::from_degrees(47.5, 8.7203, 10)));
        CHECK(s.device("70b3d57ed0050001")->square_id == "A");
    }

    TEST_CASE("queries") {
        NetworkServer s{MeasurementStore{}};
        add_squares(s);
        CHECK(s.records().empty());
        CHECK(s.devices().empty());
        std::vector<UplinkEnvelope> batch;
        for (std::uint32_t i = 0; i < 100; ++i) {
            batch.push_back(make(i, kT0 + 7200 * (i + 1), GeoPosition::from_degrees(47.5001, 8.7201, 30)));
            batch.push_back(make(i, kT0 + 7200 * (i + 1), GeoPosition::from_degrees(47.5101, 8.7401, 30),
                                 "70b3d57ed0050002"));
        }
        s.ingest_batch(batch);
        CHECK(s.record_count() == 200);
        const UnixSeconds from = kT0 + 7200 * 20, to = kT0 + 7200 * 61;
        std::size_t expect = 0;
        for (const auto &e : batch) expect += e.dev_eui.ends_with("1") && e.received_at >= from && e.received_at < to;
        CHECK(s.query_device("70b3d57ed0050001", from, to).size() == expect);
        CHECK(s.query_square("V", INT64_MIN, INT64_MAX).size() == 100);
        CHECK_THROWS_AS(s.query_device("70b3d57ed00500ff", from, to), NotFound);
        CHECK_THROWS_AS(s.query_square("X", from, to), NotFound);
        CHECK_THROWS_AS(s.query_device("70b3d57ed0050001", to, from), ParamError);

        const auto recs = s.records();
        for (std::size_t i = 1; i < recs.size(); ++i) {
            CHECK(std::tie(recs[i - 1].received_at, recs[i - 1].dev_eui) <= std::tie(recs[i].received_at, recs[i].dev_eui));
        }
    }

    TEST_CASE("square summary") {
        NetworkServer s{MeasurementStore{}};
        add_squares(s);
        const auto in_m = GeoPosition::from_degrees(47.5001, 8.7201, 30);
        // frame received 02:00 covers 00:00-02:00; the one at 00:30 reaches back into the previous day
        s.ingest_uplink(make(0, kT0 + 7200, in_m));
        s.ingest_uplink(make(1, kT0 + 1800, in_m));
        const auto sum = s.square_summary("M", "2022-06-06");
        CHECK(sum.frames == 2);
        CHECK(sum.sitting_min_total == 1 + 2 + 3 + 4 + 4);
        CHECK(*sum.noise_db_mean == doctest::Approx((50 + 52 + 54 + 56 + 56) / 5.0));
        CHECK(*sum.temperature_c_min == doctest::Approx(20.00));
        CHECK(*sum.temperature_c_max == doctest::Approx(20.01));
        const auto empty = s.square_summary("M", "2022-06-08");
        CHECK(empty.frames == 0);
        CHECK_FALSE(empty.noise_db_mean);
    }

    TEST_CASE("persistence across reopen") {
        const auto path = std::filesystem::temp_directory_path() / "urbansense-server-test.db";
        for (const char *suffix : {"", "-wal", "-shm"}) std::filesystem::remove(path.string() + suffix);
        {
            NetworkServer s{MeasurementStore{path.string()}};
            s.set_squares({square("M", 47.50, 8.72)});
            s.set_reference({{{kT0, 20.0, false}, {kT0 + 600, 20.5, true}}});
            s.ingest_uplink(make(0, kT0 + 7200, GeoPosition::from_degrees(47.5001, 8.7201, 30)));
        }
        NetworkServer s{MeasurementStore{path.string()}};
        CHECK(s.record_count() == 1);
        CHECK(s.squares().size() == 1);
        CHECK(s.reference().samples.size() == 2);
        CHECK(s.reference().samples[1].raining);
        CHECK(s.ingest_uplink(make(0, kT0 + 7200)).status == IngestStatus::Duplicate);
        for (const char *suffix : {"", "-wal", "-shm"}) std::filesystem::remove(path.string() + suffix);
    }

    TEST_CASE("concurrent ingestion keeps every frame once") {
        NetworkServer s{MeasurementStore{}};
        add_squares(s);
        std::vector<std::jthread> threads;
        for (int t = 0; t < 4; ++t) {
            threads.emplace_back([&s, t] {
                for (std::uint32_t i = 0; i < 50; ++i) {
                    // every thread sends the same 50 frames of its own device and half of its neighbour's
                    char eui[17];
                    std::snprintf(eui, sizeof eui, "70b3d57ed00500%02x", t);
                    s.ingest_uplink(make(i, kT0 + 7200 * i, GeoPosition::no_fix(), eui));
                    std::snprintf(eui, sizeof eui, "70b3d57ed00500%02x", (t + 1) % 4);
                    if (i % 2 == 0) s.ingest_uplink(make(i, kT0 + 7200 * i, GeoPosition::no_fix(), eui));
                }
            });
        }
        threads.clear();
        CHECK(s.record_count() == 200);
        for (const auto &d : s.devices()) CHECK(d.frames == 50);
    }

    TEST_CASE("measurement intervals are back-computed") {
        MeasurementRecord r;
        r.received_at = kT0 + 7200;
        const auto rows = r.intervals();
        CHECK(rows[0].interval_start == kT0);
        CHECK(rows[3].interval_start == kT0 + 5400);
    }
}
