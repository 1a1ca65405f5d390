#include <doctest.h>

#include <random>

#include "urbansense/csv.hpp"
#include "urbansense/errors.hpp"

using namespace urbansense;

namespace {

const UnixSeconds kT0 = 1654473600;

MeasurementRecord record(std::uint32_t fcnt) {
    MeasurementRecord r;
    r.dev_eui = "70b3d57ed0050001";
    r.fcnt = fcnt;
    r.received_at = kT0 + 7200 * (fcnt + 1);
    r.rssi_dbm = -101;
    r.snr_db = -7.3;
    r.square_id = "M";
    r.frame.debug = 1;
    r.frame.position = {473661230, 85517310, 25, 1700000000};
    r.frame.battery_pct = 87;
    r.frame.temperature_cC = -105;
    r.frame.humidity_cRH = 5507;
    r.frame.sitting_min = {12, 0, 30, kInvalidByte};
    r.frame.noise_db = {55, kInvalidByte, 58, 52};
    return r;
}

} // namespace

TEST_SUITE("csv") {
    TEST_CASE("header only for no records") {
        const std::string csv = export_csv({});
        CHECK(csv == "dev_eui,square_id,received_at,interval_start,sitting_min,noise_db,temperature_c,humidity_rh,"
                     "battery_pct,lat,lon,accuracy_m,fcnt,header,debug,fix_time,port,rssi_dbm,snr_db\r\n");
        CHECK(import_csv(csv).empty());
    }

    TEST_CASE("one frame gives four rows") {
        const std::vector<MeasurementRecord> recs{record(0)};
        const auto rows = parse_csv(export_csv(recs));
        REQUIRE(rows.size() == 5);
        CHECK(rows[1][3] == "2022-06-06T00:00:00Z");
        CHECK(rows[4][3] == "2022-06-06T01:30:00Z");
        CHECK(rows[1][2] == "2022-06-06T02:00:00Z");
        CHECK(rows[1][4] == "12");
        CHECK(rows[4][4] == "");
        CHECK(rows[2][5] == "");
        CHECK(rows[1][6] == "-1.05");
        CHECK(rows[1][7] == "55.07");
        CHECK(rows[1][9] == "47.3661230");
        CHECK(rows[1][10] == "8.5517310");
        CHECK(rows[1][11] == "2.5");
        CHECK(rows[1][18] == "-7.3");
    }

    TEST_CASE("round trip is exact") {
        std::mt19937 rng(1);
        std::vector<MeasurementRecord> recs;
        for (std::uint32_t i = 0; i < 300; ++i) {
            auto r = record(i);
            r.dev_eui = i % 3 == 0 ? "70b3d57ed0050002" : "70b3d57ed0050001";
            r.frame.temperature_cC = static_cast<std::int16_t>(static_cast<int>(rng() % 60000) - 30000);
            r.frame.humidity_cRH = static_cast<std::uint16_t>(rng() % 10001);
            r.snr_db = (static_cast<int>(rng() % 400) - 200) / 10.0;
            r.rssi_dbm = -static_cast<int>(rng() % 130);
            if (i % 5 == 0) r.frame.position = GeoPosition::no_fix(123);
            if (i % 7 == 0) r.square_id.reset();
            if (i % 11 == 0) r.square_id = "odd, \"quoted\" id";
            if (i % 4 == 0) r.frame.position.latitude_e7 = -r.frame.position.latitude_e7;
            recs.push_back(r);
        }
        std::sort(recs.begin(), recs.end(), [](const auto &a, const auto &b) {
            return std::tie(a.received_at, a.dev_eui, a.fcnt) < std::tie(b.received_at, b.dev_eui, b.fcnt);
        });
        const auto back = import_csv(export_csv(recs));
        REQUIRE(back.size() == recs.size());
        for (std::size_t i = 0; i < recs.size(); ++i) REQUIRE(back[i] == recs[i]);
    }

    TEST_CASE("rfc4180 parsing") {
        const auto rows = parse_csv("a,\"b,c\",\"d\"\"e\"\r\n,\"multi\r\nline\",\n");
        REQUIRE(rows.size() == 2);
        CHECK(rows[0] == std::vector<std::string>{"a", "b,c", "d\"e"});
        CHECK(rows[1] == std::vector<std::string>{"", "multi\r\nline", ""});
        CHECK(csv_field("plain") == "plain");
        CHECK(csv_field("a\"b") == "\"a\"\"b\"");
        CHECK_THROWS_AS(parse_csv("\"open"), CsvError);
    }

    TEST_CASE("import rejects broken files") {
        const std::vector<MeasurementRecord> recs{record(0)};
        const std::string good = export_csv(recs);
        CHECK_THROWS_AS(import_csv(""), CsvError);
        CHECK_THROWS_AS(import_csv("x,y\r\n"), CsvError);
        std::string bad = good;
        bad.replace(bad.find("-1.05"), 5, "-1.0x");
        CHECK_THROWS_AS(import_csv(bad), CsvError);
        bad = good;
        bad.replace(bad.find("2022-06-06T00:00:00Z"), 20, "2022-06-06T00:10:00Z");
        CHECK_THROWS_AS(import_csv(bad), CsvError);
        // dropping one of the four interval rows
        bad = good.substr(0, good.rfind("70b3d57ed0050001"));
        CHECK_THROWS_AS(import_csv(bad), CsvError);
    }

    TEST_CASE("the thirteen core columns alone still import") {
        const std::vector<MeasurementRecord> recs{record(0)};
        std::string core;
        for (const auto &row : parse_csv(export_csv(recs))) {
            for (std::size_t i = 0; i < 13; ++i) core += (i ? "," : "") + csv_field(row[i]);
            core += "\r\n";
        }
        const auto back = import_csv(core);
        REQUIRE(back.size() == 1);
        CHECK(back[0].frame.sitting_min == recs[0].frame.sitting_min);
        CHECK(back[0].frame.position.latitude_e7 == recs[0].frame.position.latitude_e7);
    }
}
