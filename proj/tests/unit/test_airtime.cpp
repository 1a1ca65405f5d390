#include <doctest.h>

#include "urbansense/airtime.hpp"
#include "urbansense/errors.hpp"

using namespace urbansense;

namespace {
RadioParams sf(int s, double bw = 125000.0) {
    RadioParams p;
    p.sf = s;
    p.bw_hz = bw;
    return p;
}
} // namespace

TEST_SUITE("airtime") {
    TEST_CASE("symbol time") {
        CHECK(symbol_time_s(sf(12)) == doctest::Approx(0.032768).epsilon(1e-12));
        CHECK(symbol_time_s(sf(7)) == doctest::Approx(0.001024).epsilon(1e-12));
        CHECK(symbol_time_s(sf(7, 250000)) == doctest::Approx(0.000512).epsilon(1e-12));
    }

    TEST_CASE("payload symbols") {
        CHECK(payload_symbol_count(sf(12), 29) == 38); // 8 + ceil(228/40)*5
        CHECK(payload_symbol_count(sf(7), 29) == 53);  // 8 + ceil(248/28)*5
        CHECK(payload_symbol_count(sf(12), 0) == 8);
        CHECK(payload_symbol_count(sf(7), 42) == 73);
        // low data rate optimisation only kicks in automatically at SF11/12 on 125 kHz
        CHECK(sf(11).ldro());
        CHECK_FALSE(sf(10).ldro());
        CHECK_FALSE(sf(12, 250000).ldro());
        RadioParams forced = sf(7);
        forced.low_data_rate_optimize = true;
        CHECK(payload_symbol_count(forced, 29) == 73); // 8 + ceil(248/20)*5
    }

    TEST_CASE("time on air") {
        const auto a = time_on_air(sf(12), 29);
        CHECK(a.payload_s == doctest::Approx(1.245184).epsilon(1e-12));
        CHECK(a.preamble_s == doctest::Approx(12.25 * 0.032768).epsilon(1e-12));
        CHECK(a.total_s == doctest::Approx(a.preamble_s + a.payload_s));

        const auto b = time_on_air(sf(7), 29);
        CHECK(b.payload_s == doctest::Approx(0.054272).epsilon(1e-12));
        CHECK(b.total_s == doctest::Approx(0.066816).epsilon(1e-12));

        CHECK(time_on_air(sf(7), 29 + kLoraWanMacOverheadBytes).payload_s == doctest::Approx(0.074752).epsilon(1e-12));
    }

    TEST_CASE("monotone in payload length") {
        for (int s = 7; s <= 12; ++s) {
            int prev = 0;
            for (int pl = 0; pl <= 255; ++pl) {
                const int n = payload_symbol_count(sf(s), pl);
                REQUIRE(n >= prev);
                prev = n;
            }
        }
    }

    TEST_CASE("parameter validation") {
        CHECK_THROWS_AS(time_on_air(sf(6), 10), ParamError);
        CHECK_THROWS_AS(time_on_air(sf(13), 10), ParamError);
        CHECK_THROWS_AS(time_on_air(sf(7, 0), 10), ParamError);
        RadioParams p = sf(7);
        p.cr = 5;
        CHECK_THROWS_AS(time_on_air(p, 10), ParamError);
        CHECK_THROWS_AS(time_on_air(sf(7), -1), ParamError);
        CHECK_THROWS_AS(time_on_air(sf(7), 256), ParamError);
    }
}
