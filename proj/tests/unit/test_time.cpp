#include <doctest.h>

#include "urbansense/errors.hpp"
#include "urbansense/time.hpp"

using namespace urbansense;

TEST_SUITE("time") {
    TEST_CASE("rfc3339 round trip") {
        CHECK(parse_rfc3339("1970-01-01T00:00:00Z") == 0);
        CHECK(parse_rfc3339("2022-06-06T00:00:00Z") == 1654473600);
        CHECK(format_rfc3339(1654473600) == "2022-06-06T00:00:00Z");
        CHECK(format_rfc3339(1700000000) == "2023-11-14T22:13:20Z");
        CHECK(parse_rfc3339("2022-06-06T02:00:00+02:00") == 1654473600);
        CHECK(parse_rfc3339("2022-06-05T23:30:00-00:30") == 1654473600);
        CHECK(parse_rfc3339("2022-06-06T00:00:00.999Z") == 1654473600);
        for (UnixSeconds t : {0LL, 951782400LL, 1654473600LL, 1700000000LL, 4102444799LL}) {
            CHECK(parse_rfc3339(format_rfc3339(t)) == t);
        }
    }

    TEST_CASE("rejects malformed timestamps") {
        for (const char *bad : {"", "2022-06-06", "2022-06-06T00:00:00", "2022-13-01T00:00:00Z",
                                "2022-02-30T00:00:00Z", "2022-06-06T24:00:00Z", "2022-06-06X00:00:00Z",
                                "2022-06-06T00:00:00Zjunk"}) {
            CAPTURE(bad);
            CHECK_THROWS_AS(parse_rfc3339(bad), TimeFormatError);
        }
    }

    TEST_CASE("dates and weekdays") {
        CHECK(parse_date("2022-06-06") == 1654473600);
        CHECK(format_date(1654473600 + 86399) == "2022-06-06");
        CHECK(iso_weekday(parse_date("2022-06-06")) == 1);
        CHECK(iso_weekday(parse_date("2022-06-11")) == 6);
        CHECK(is_weekend(parse_date("2022-06-12")));
        CHECK_FALSE(is_weekend(parse_date("2022-06-10")));
        CHECK(iso_weekday(0) == 4); // 1970-01-01 was a Thursday
        CHECK(parse_time_arg("2022-06-06") == parse_time_arg("2022-06-06T00:00:00Z"));
        CHECK_THROWS_AS(parse_date("2022-6-6"), TimeFormatError);
    }

    TEST_CASE("day arithmetic before 1970") {
        CHECK(day_start(-1) == -86400);
        CHECK(second_of_day(-1) == 86399);
        CHECK(hour_of_day(1654473600 + 12 * 3600 + 1800) == doctest::Approx(12.5));
    }
}
