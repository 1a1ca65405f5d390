#include <doctest.h>

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "urbansense/codec.hpp"
#include "urbansense/http_api.hpp"
#include "urbansense/server.hpp"

using namespace urbansense;
using nlohmann::json;

namespace {

const UnixSeconds kT0 = 1654473600;

// Runs the API on an ephemeral port for the lifetime of the fixture.
struct Api {
    NetworkServer server{MeasurementStore{}};
    httplib::Server http;
    std::thread thread;
    int port = 0;

    Api() {
        SquareDefinition m{"M", "M", {}};
        for (auto [a, b] : {std::pair{-0.001, -0.001}, {-0.001, 0.001}, {0.001, 0.001}, {0.001, -0.001}}) {
            m.boundary.push_back(GeoPosition::from_degrees(47.5 + a, 8.72 + b));
        }
        server.set_squares({m});
        ReferenceSeries ref;
        for (UnixSeconds t = kT0; t <= kT0 + 2 * 86400; t += 600) ref.samples.push_back({t, 20.0, false});
        server.set_reference(ref);
        mount_api(http, server);
        port = http.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { http.listen_after_bind(); });
        http.wait_until_ready();
    }
    ~Api() {
        http.stop();
        thread.join();
    }
    httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

std::string envelope(std::uint32_t fcnt, const std::string &payload) {
    return json{{"dev_eui", "70b3d57ed0050001"}, {"fcnt", fcnt},    {"port", 2},
                {"payload_hex", payload},         {"rssi_dbm", -99}, {"snr_db", 5.5},
                {"received_at", format_rfc3339(kT0 + 7200 * (fcnt + 1))}}
        .dump();
}

std::string payload(std::int16_t temp_cC = 2500) {
    SensorFrame f;
    f.position = GeoPosition::from_degrees(47.5001, 8.7201, 30);
    f.battery_pct = 80;
    f.temperature_cC = temp_cC;
    f.humidity_cRH = 4000;
    f.sitting_min = {5, 10, 0, 0};
    f.noise_db = {50, 50, 50, 50};
    return encode_frame_hex(f);
}

} // namespace

TEST_SUITE("http") {
    TEST_CASE("uplink ingestion statuses") {
        Api api;
        auto c = api.client();
        auto r = c.Post("/api/v1/uplinks", envelope(0, payload()), "application/json");
        REQUIRE(r);
        CHECK(r->status == 201);
        r = c.Post("/api/v1/uplinks", envelope(0, payload()), "application/json");
        CHECK(r->status == 200);
        CHECK(json::parse(r->body)["status"] == "duplicate");

        r = c.Post("/api/v1/uplinks", envelope(1, std::string(56, '0')), "application/json");
        CHECK(r->status == 422);
        CHECK(json::parse(r->body)["error"] == "LengthError");
        r = c.Post("/api/v1/uplinks", envelope(1, "00" + payload().substr(2)), "application/json");
        CHECK(r->status == 422);
        CHECK(json::parse(r->body)["error"] == "UnknownLayoutError");

        r = c.Post("/api/v1/uplinks", "{not json", "application/json");
        CHECK(r->status == 400);
        CHECK(json::parse(r->body).contains("detail"));
        r = c.Post("/api/v1/uplinks", R"({"dev_eui": "xyz"})", "application/json");
        CHECK(r->status == 400);
        CHECK(api.server.record_count() == 1);
    }

    TEST_CASE("devices, measurements, summary and export") {
        Api api;
        auto c = api.client();
        auto r = c.Get("/api/v1/export.csv");
        REQUIRE(r);
        CHECK(r->status == 200);
        CHECK(std::count(r->body.begin(), r->body.end(), '\n') == 1);

        for (std::uint32_t i = 0; i < 12; ++i) c.Post("/api/v1/uplinks", envelope(i, payload()), "application/json");

        r = c.Get("/api/v1/devices");
        auto devs = json::parse(r->body);
        REQUIRE(devs.size() == 1);
        CHECK(devs[0]["square_id"] == "M");
        CHECK(devs[0]["battery_pct"] == 80);
        CHECK(devs[0]["last_seen"] == "2022-06-07T00:00:00Z");

        r = c.Get("/api/v1/devices/70b3d57ed0050001/measurements?from=2022-06-06T04:00:00Z&to=2022-06-06T10:00:00Z");
        CHECK(r->status == 200);
        CHECK(json::parse(r->body).size() == 3);
        r = c.Get("/api/v1/devices/70b3d57ed0050009/measurements");
        CHECK(r->status == 404);
        r = c.Get("/api/v1/devices/70b3d57ed0050001/measurements?from=yesterday");
        CHECK(r->status == 400);

        r = c.Get("/api/v1/squares/M/summary?date=2022-06-06");
        CHECK(r->status == 200);
        const auto s = json::parse(r->body);
        CHECK(s["sitting_min_total"] == 12 * 15);
        CHECK(s["temperature_c_max"] == 25.0);
        CHECK(c.Get("/api/v1/squares/Q/summary?date=2022-06-06")->status == 404);
        CHECK(c.Get("/api/v1/squares/M/summary")->status == 400);

        r = c.Get("/api/v1/export.csv?from=2022-06-06&to=2022-06-06T06:00:00Z");
        CHECK(std::count(r->body.begin(), r->body.end(), '\n') == 1 + 2 * 4);
    }

    TEST_CASE("analytics endpoints") {
        Api api;
        auto c = api.client();
        for (std::uint32_t i = 0; i < 12; ++i) c.Post("/api/v1/uplinks", envelope(i, payload(4100)), "application/json");
        auto r = c.Get("/api/v1/analytics/sun?dev_eui=70b3d57ed0050001");
        REQUIRE(r->status == 200);
        const auto days = json::parse(r->body);
        REQUIRE(days.size() == 1);
        CHECK(days[0]["label"] == "sun");
        CHECK(c.Get("/api/v1/analytics/sun")->status == 400);

        r = c.Get("/api/v1/analytics/rain?humidity_rh=85");
        CHECK(json::parse(r->body)["rain"] == true);
        CHECK(c.Get("/api/v1/analytics/rain?humidity_rh=120")->status == 400);

        r = c.Get("/api/v1/analytics/scatter?square=M");
        CHECK(json::parse(r->body)["points"].size() == 48);
        r = c.Get("/api/v1/analytics/profile?square=M");
        CHECK(json::parse(r->body)["weekday"].size() == 96);
        r = c.Get("/api/v1/analytics/daily");
        CHECK(r->status == 200);
        CHECK(json::parse(r->body).size() == 3);
    }
}
