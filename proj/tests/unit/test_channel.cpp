#include <doctest.h>

#include "urbansense/channel.hpp"
#include "urbansense/errors.hpp"

using namespace urbansense;

namespace {
UplinkEnvelope env(std::uint32_t fcnt, UnixSeconds at, std::string eui = "70b3d57ed0050001") {
    UplinkEnvelope e;
    e.dev_eui = std::move(eui);
    e.fcnt = fcnt;
    e.received_at = at;
    return e;
}
} // namespace

TEST_SUITE("channel") {
    TEST_CASE("lossless channel delivers everything") {
        const ChannelModel ch;
        for (std::uint32_t i = 0; i < 1000; ++i) CHECK(channel_deliver(env(i, i * 7200), ch));
    }

    TEST_CASE("dropout is permanent and inclusive") {
        ChannelModel ch;
        const UnixSeconds day30 = 30 * kSecondsPerDay;
        ch.dropout_at["70b3d57ed0050001"] = day30;
        CHECK(channel_outcome(env(1, day30 - 1), ch) == Delivery::Delivered);
        CHECK(channel_outcome(env(2, day30), ch) == Delivery::DroppedOut);
        CHECK(channel_outcome(env(3, 31 * kSecondsPerDay), ch) == Delivery::DroppedOut);
        CHECK(channel_outcome(env(3, 31 * kSecondsPerDay, "70b3d57ed0050002"), ch) == Delivery::Delivered);
    }

    TEST_CASE("loss rate is binomial") {
        ChannelModel ch;
        ch.loss_probability = 0.1;
        ch.seed = 77;
        int delivered = 0;
        for (std::uint32_t i = 0; i < 10000; ++i) delivered += channel_deliver(env(i, i), ch);
        // 0.9 +- 0.01 is about 3.3 standard deviations
        CHECK(delivered / 10000.0 == doctest::Approx(0.9).epsilon(0.0111));
    }

    TEST_CASE("outcome is a pure function of seed, device and counter") {
        ChannelModel ch;
        ch.loss_probability = 0.5;
        ch.seed = 3;
        for (std::uint32_t i = 0; i < 200; ++i) {
            auto e = env(i, 100);
            const auto first = channel_outcome(e, ch);
            e.received_at = 999999; // time does not matter without a dropout
            CHECK(channel_outcome(e, ch) == first);
        }
        ch.loss_probability = 1.0;
        CHECK_THROWS_AS(ch.validate(), ParamError);
        ch.loss_probability = -0.1;
        CHECK_THROWS_AS(ch.validate(), ParamError);
    }
}
