#include <doctest.h>

#include <numeric>

#include "urbansense/analytics.hpp"
#include "urbansense/errors.hpp"

using namespace urbansense;

namespace {

const UnixSeconds kMon = 1654473600; // Monday 2022-06-06
const UnixSeconds kH = 3600;

ReferenceSeries flat_reference(double temp, UnixSeconds from, UnixSeconds to) {
    ReferenceSeries r;
    for (UnixSeconds t = from; t <= to; t += 600) r.samples.push_back({t, temp, false});
    return r;
}

MeasurementRecord rec(UnixSeconds received_at, std::array<std::uint8_t, 4> sitting, double humidity = 50.0,
                      std::string square = "M", std::uint32_t fcnt = 0) {
    MeasurementRecord r;
    r.dev_eui = "70b3d57ed0050001";
    r.fcnt = fcnt;
    r.received_at = received_at;
    r.square_id = std::move(square);
    r.frame.sitting_min = sitting;
    r.frame.humidity_cRH = static_cast<std::uint16_t>(humidity * 100);
    return r;
}

} // namespace

TEST_SUITE("analytics") {
    TEST_CASE("sun exposure classification") {
        const auto ref = flat_reference(25.0, kMon, kMon + 86400);
        const auto at = [&](double h, double temp) { return TemperatureSample{kMon + static_cast<UnixSeconds>(h * kH), temp}; };

        const std::vector<TemperatureSample> same{at(11, 25.0), at(13, 25.0)};
        auto d = sun_exposure_classify(same, ref);
        REQUIRE(d.size() == 1);
        CHECK(d[0].label == Exposure::Shade);
        CHECK(d[0].date == "2022-06-06");

        const std::vector<TemperatureSample> hot{at(12, 41.0)};
        CHECK(sun_exposure_classify(hot, ref)[0].label == Exposure::Sun);

        const std::vector<TemperatureSample> boundary{at(12, 30.0)};
        CHECK(sun_exposure_classify(boundary, ref)[0].label == Exposure::Sun);
        const std::vector<TemperatureSample> below{at(12, 29.99)};
        CHECK(sun_exposure_classify(below, ref)[0].label == Exposure::Shade);

        // outside the daytime window nothing is classified
        const std::vector<TemperatureSample> night{at(2, 41.0), at(16, 41.0)};
        CHECK(sun_exposure_classify(night, ref).empty());

        const std::vector<TemperatureSample> uncovered{{kMon + 5 * 86400, 30.0}};
        CHECK_THROWS_AS(sun_exposure_classify(uncovered, ref), CoverageError);
        CHECK_THROWS_AS(sun_exposure_classify(hot, ref, {}, 0.0), ParamError);
    }

    TEST_CASE("reference interpolation feeds the classifier") {
        ReferenceSeries ref;
        ref.samples = {{kMon + 12 * kH, 20.0, false}, {kMon + 13 * kH, 30.0, false}};
        CHECK(*ref.temperature_at(kMon + 12 * kH + 1800) == doctest::Approx(25.0));
        CHECK_FALSE(ref.temperature_at(kMon));
        const std::vector<TemperatureSample> s{{kMon + 12 * kH + 1800, 30.0}};
        const auto d = sun_exposure_classify(s, ref);
        CHECK(d[0].mean_delta_c == doctest::Approx(5.0));
        CHECK(d[0].label == Exposure::Sun);
    }

    TEST_CASE("rain flag band") {
        CHECK(rain_flag(85));
        CHECK_FALSE(rain_flag(79.99));
        CHECK(rain_flag(80));
        CHECK(rain_flag(100));
        CHECK_FALSE(rain_flag(0));
        CHECK_THROWS_AS(rain_flag(100.01), RangeError);
        CHECK_THROWS_AS(rain_flag(-1), RangeError);
    }

    TEST_CASE("humidity scatter and quadrants") {
        const std::vector<MeasurementRecord> one{rec(kMon + 2 * kH, {10, 0xFF, 0xFF, 0xFF}, 50.0)};
        const auto h = occupancy_vs_humidity(one, "M");
        REQUIRE(h.points.size() == 1);
        CHECK(h.points[0].sitting_min == 10);
        CHECK(h.quadrants.dry_low == 1);

        const std::vector<MeasurementRecord> many{rec(kMon + 2 * kH, {15, 14, 0, 30}, 80.0, "M", 0),
                                                  rec(kMon + 4 * kH, {15, 14, 0, 30}, 79.99, "M", 1),
                                                  rec(kMon + 4 * kH, {30, 30, 30, 30}, 90.0, "V", 2)};
        const auto q = occupancy_vs_humidity(many, "M").quadrants;
        CHECK(q.wet_high == 2);
        CHECK(q.wet_low == 2);
        CHECK(q.dry_high == 2);
        CHECK(q.dry_low == 2);
        CHECK(occupancy_vs_humidity(many, "X").points.empty());
    }

    TEST_CASE("hourly profile bucketing") {
        auto empty = hourly_profile({}, "M");
        CHECK(empty.weekday.size() == 96);
        CHECK(empty.weekend.size() == 96);
        CHECK(std::accumulate(empty.weekday.begin(), empty.weekday.end(), 0.0) == 0.0);
        CHECK(empty.lunch_start_h == 12.0);
        CHECK(empty.lunch_end_h == 13.0);

        // frame received 14:00 Monday: intervals 12:00, 12:30, 13:00, 13:30
        const std::vector<MeasurementRecord> r{rec(kMon + 14 * kH, {20, 10, 0, 0})};
        const auto p = hourly_profile(r, "M");
        for (std::size_t i = 0; i < 96; ++i) {
            CAPTURE(i);
            const double expect = i == 48 || i == 49 ? 20.0 / 5 / 2 : i == 50 || i == 51 ? 10.0 / 5 / 2 : 0.0;
            CHECK(p.weekday[i] == doctest::Approx(expect));
            CHECK(p.weekend[i] == 0.0);
        }

        // Saturday record goes to the weekend profile, scaled by 1/2
        const std::vector<MeasurementRecord> sat{rec(kMon + 5 * 86400 + 2 * kH, {0, 0, 0, 8})};
        const auto w = hourly_profile(sat, "M", 1.0);
        CHECK(w.weekday.size() == 24);
        CHECK(w.weekend[1] == doctest::Approx(4.0));
        CHECK_THROWS_AS(hourly_profile(sat, "M", 0.7), ParamError);
    }

    TEST_CASE("profile mass is conserved") {
        std::vector<MeasurementRecord> r;
        double total = 0;
        for (std::uint32_t i = 0; i < 84; ++i) {
            const std::array<std::uint8_t, 4> s{static_cast<std::uint8_t>(i % 31), 3, 0, 7};
            r.push_back(rec(kMon + 7200 * (i + 1), s, 50.0, "M", i));
            total += s[0] + s[1] + s[2] + s[3];
        }
        const auto p = hourly_profile(r, "M", 0.4, 1800);
        const double wd = std::accumulate(p.weekday.begin(), p.weekday.end(), 0.0) * 5;
        const double we = std::accumulate(p.weekend.begin(), p.weekend.end(), 0.0) * 2;
        CHECK(wd + we == doctest::Approx(total));
    }

    TEST_CASE("daily sitting against reference temperature") {
        const auto ref = flat_reference(18.0, kMon, kMon + 2 * 86400 - 600);
        const std::vector<MeasurementRecord> r{rec(kMon + 2 * kH, {10, 0, 5, 0}, 50, "M", 0),
                                               rec(kMon + 4 * kH, {0, 0, 0, 15}, 50, "M", 1)};
        const std::vector<std::string> squares{"M", "V"};
        const auto rows = daily_sitting_vs_temperature(r, ref, squares);
        REQUIRE(rows.size() == 4);
        CHECK(rows[0].date == "2022-06-06");
        CHECK(rows[0].square_id == "M");
        CHECK(rows[0].total_sitting_min == 30);
        CHECK(rows[0].ref_mean_temp_c == doctest::Approx(18.0));
        for (std::size_t i = 1; i < 4; ++i) CHECK(rows[i].total_sitting_min == 0);

        const std::vector<MeasurementRecord> late{rec(kMon + 10 * 86400, {1, 1, 1, 1})};
        try {
            (void)daily_sitting_vs_temperature(late, ref);
            FAIL("expected CoverageError");
        } catch (const CoverageError &e) {
            CHECK(e.missing() == std::vector<std::string>{"2022-06-15"});
        }
    }
}
