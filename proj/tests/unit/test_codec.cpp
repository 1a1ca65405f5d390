#include <doctest.h>

#include <random>

#include "urbansense/codec.hpp"
#include "urbansense/errors.hpp"

using namespace urbansense;

namespace {

SensorFrame reference_frame() {
    SensorFrame f;
    f.debug = 0x01;
    f.position = {473661230, 85517310, 25, 1700000000};
    f.battery_pct = 87;
    f.temperature_cC = 2150;
    f.humidity_cRH = 5500;
    f.sitting_min = {12, 0, 30, 5};
    f.noise_db = {55, 60, 58, 52};
    return f;
}

SensorFrame random_frame(std::mt19937_64 &rng) {
    auto pick = [&](auto lo, auto hi) {
        return static_cast<decltype(lo)>(std::uniform_int_distribution<long long>(lo, hi)(rng));
    };
    SensorFrame f;
    f.debug = pick(std::uint8_t{0}, std::uint8_t{7});
    if (pick(0, 9) == 0) {
        f.position = GeoPosition::no_fix(pick(std::uint32_t{0}, UINT32_MAX));
    } else {
        f.position = {pick(-900000000, 900000000), pick(-1800000000, 1800000000),
                      pick(std::uint16_t{0}, std::uint16_t{65534}), pick(std::uint32_t{0}, UINT32_MAX)};
    }
    f.battery_pct = pick(0, 10) == 0 ? kInvalidByte : pick(std::uint8_t{0}, std::uint8_t{100});
    f.temperature_cC = pick(std::int16_t{INT16_MIN}, std::int16_t{INT16_MAX});
    f.humidity_cRH = pick(std::uint16_t{0}, kMaxHumidityCRH);
    for (auto &s : f.sitting_min) s = pick(0, 10) == 0 ? kInvalidByte : pick(std::uint8_t{0}, kMaxSittingMin);
    for (auto &n : f.noise_db) n = pick(0, 10) == 0 ? kInvalidByte : pick(std::uint8_t{0}, kMaxNoiseDb);
    return f;
}

} // namespace

TEST_SUITE("codec") {
    TEST_CASE("frozen reference frame") {
        // Packed independently with struct.pack('>BBiiIHBhH4B4B', ...).
        const std::string expected = "01011c3b7f2e0518e3fe6553f1000019570866157c0c001e05373c3a34";
        CHECK(encode_frame_hex(reference_frame()) == expected);
        CHECK(decode_frame_hex(expected) == reference_frame());
    }

    TEST_CASE("all zero frame") {
        SensorFrame f;
        f.position = {0, 0, 0, 0};
        f.battery_pct = 0;
        const auto bytes = encode_frame(f);
        CHECK(bytes[0] == 0x01);
        for (std::size_t i = 1; i < kFrameSize; ++i) CHECK(bytes[i] == 0);
    }

    TEST_CASE("negative coordinates are two's complement") {
        SensorFrame f = reference_frame();
        f.position.latitude_e7 = -1;
        f.temperature_cC = -500;
        const auto bytes = encode_frame(f);
        CHECK(bytes[2] == 0xFF);
        CHECK(bytes[5] == 0xFF);
        CHECK(bytes[17] == 0xFE);
        CHECK(bytes[18] == 0x0C);
        CHECK(decode_frame(bytes) == f);
    }

    TEST_CASE("random round trip") {
        std::mt19937_64 rng(42);
        for (int i = 0; i < 10000; ++i) {
            const SensorFrame f = random_frame(rng);
            const auto bytes = encode_frame(f);
            REQUIRE(bytes.size() == kFrameSize);
            REQUIRE(decode_frame(bytes) == f);
            REQUIRE(decode_frame_hex(to_hex(bytes)) == f);
        }
    }

    TEST_CASE("encode rejects out of range fields") {
        const auto field_of = [](SensorFrame f) {
            try {
                (void)encode_frame(f);
            } catch (const EncodeError &e) {
                return e.field();
            }
            return std::string("none");
        };
        SensorFrame f = reference_frame();
        f.header = 2;
        CHECK(field_of(f) == "header");
        f = reference_frame();
        f.debug = 0x08;
        CHECK(field_of(f) == "debug");
        f = reference_frame();
        f.position.latitude_e7 = 900000001;
        CHECK(field_of(f) == "latitude");
        f = reference_frame();
        f.position.longitude_e7 = -1800000001;
        CHECK(field_of(f) == "longitude");
        f = reference_frame();
        f.battery_pct = 101;
        CHECK(field_of(f) == "battery_pct");
        f = reference_frame();
        f.humidity_cRH = 10001;
        CHECK(field_of(f) == "humidity_cRH");
        f = reference_frame();
        f.sitting_min[2] = 31;
        CHECK(field_of(f) == "sitting_min");
        f = reference_frame();
        f.noise_db[0] = 141;
        CHECK(field_of(f) == "noise_db");
    }

    TEST_CASE("decode errors") {
        const auto good = encode_frame(reference_frame());
        CHECK_THROWS_AS(decode_frame(std::span(good).first(28)), LengthError);
        std::vector<std::uint8_t> longer(good.begin(), good.end());
        longer.push_back(0);
        CHECK_THROWS_AS(decode_frame(longer), LengthError);
        auto bad = good;
        bad[0] = 0x02;
        CHECK_THROWS_AS(decode_frame(bad), UnknownLayoutError);
        bad = good;
        bad[0] = 0x00;
        CHECK_THROWS_AS(decode_frame(bad), UnknownLayoutError);
        bad = good;
        bad[16] = 150;
        CHECK_THROWS_AS(decode_frame(bad), RangeError);
        bad = good;
        bad[1] = 0x10;
        CHECK_THROWS_AS(decode_frame(bad), RangeError);
        bad = good;
        bad[19] = 0x27;
        bad[20] = 0x11; // 10001
        try {
            (void)decode_frame(bad);
            FAIL("expected RangeError");
        } catch (const RangeError &e) {
            CHECK(e.field() == "humidity_cRH");
        }
        CHECK_THROWS_AS(decode_frame_hex(std::string(58, '0')), UnknownLayoutError);
    }

    TEST_CASE("hex helpers") {
        CHECK(to_hex(std::vector<std::uint8_t>{0x00, 0xab, 0xFF}) == "00abff");
        CHECK(from_hex("00ABff") == std::vector<std::uint8_t>{0x00, 0xab, 0xff});
        CHECK_THROWS_AS(from_hex("abc"), HexError);
        CHECK_THROWS_AS(from_hex("zz"), HexError);
        CHECK_THROWS_AS(decode_frame_hex("01 01"), HexError);
    }

    TEST_CASE("json round trip") {
        const SensorFrame f = reference_frame();
        const nlohmann::json j = f;
        CHECK(j.get<SensorFrame>() == f);
        SensorFrame nf = f;
        nf.position = GeoPosition::no_fix(5);
        CHECK(nlohmann::json(nf).get<SensorFrame>() == nf);
    }
}
