#include <doctest.h>

#include <algorithm>

#include "urbansense/codec.hpp"
#include "urbansense/energy.hpp"
#include "urbansense/errors.hpp"
#include "urbansense/node_sim.hpp"

using namespace urbansense;

namespace {

std::vector<Vec3> second(Vec3 v, int n = 26) { return std::vector<Vec3>(static_cast<std::size_t>(n), v); }

NodeConfig config() {
    NodeConfig c;
    c.identity = {"70b3d57ed0050001", "SNZ01"};
    c.epoch_utc = 1654473600;
    return c;
}

} // namespace

TEST_SUITE("node_sim") {
    TEST_CASE("detector stays idle on the baseline") {
        OccupancyDetector d;
        for (int s = 0; s < 100; ++s) CHECK_FALSE(d.step(second({0, 0, 1})));
        CHECK(d.state() == Occupancy::Idle);
        CHECK(d.occupied_s_this_interval() == 0);
    }

    TEST_CASE("detector hand trace: 600 s at 0.10 g then baseline") {
        // Seconds 1 and 2 build the enter debounce, second 3 switches to
        // OCCUPIED and counts; 3..600 are occupied (598 s). Baseline seconds
        // 601..610 build the exit debounce without counting; IDLE at 610.
        OccupancyDetector d;
        const Vec3 sit{0.0, 0.10, 1.0};
        std::vector<bool> occupied;
        std::vector<Occupancy> state;
        for (int s = 1; s <= 640; ++s) {
            occupied.push_back(d.step(second(s <= 600 ? sit : Vec3{0, 0, 1})));
            state.push_back(d.state());
        }
        CHECK(d.occupied_s_this_interval() == 598);
        CHECK_FALSE(occupied[0]);
        CHECK_FALSE(occupied[1]);
        CHECK(occupied[2]);
        CHECK(occupied[599]);
        CHECK_FALSE(occupied[600]);
        CHECK(state[608] == Occupancy::Occupied);
        CHECK(state[609] == Occupancy::Idle);
    }

    TEST_CASE("detector rejects a 1 s spike and a 2 s bump") {
        OccupancyDetector d;
        CHECK_FALSE(d.step(second({0, 0.10, 1})));
        for (int s = 0; s < 20; ++s) CHECK_FALSE(d.step(second({0, 0, 1})));
        CHECK_FALSE(d.step(second({0, 0.10, 1})));
        CHECK_FALSE(d.step(second({0, 0.10, 1})));
        CHECK_FALSE(d.step(second({0, 0, 1})));
        CHECK(d.state() == Occupancy::Idle);
        CHECK(d.occupied_s_this_interval() == 0);
    }

    TEST_CASE("detector hysteresis: a dip shorter than the exit debounce keeps the state") {
        OccupancyDetector d;
        for (int s = 0; s < 5; ++s) d.step(second({0, 0.10, 1}));
        for (int s = 0; s < 9; ++s) d.step(second({0, 0, 1}));
        CHECK(d.state() == Occupancy::Occupied);
        // between the thresholds: stays occupied and counts
        CHECK(d.step(second({0, 0.04, 1})));
        CHECK_THROWS_AS(d.step({}), SampleError);
        CHECK_THROWS_AS(OccupancyDetector(DetectorConfig{0.03, 0.05, 3, 10}), ParamError);
    }

    TEST_CASE("baseline calibration averages samples") {
        SimpleTrace t;
        t.baseline = {0.03, -0.02, 0.9993};
        t.accel_noise_g = 0.01;
        const Vec3 b = calibrate_baseline(t, 0, 5, 26);
        CHECK((b - t.baseline).norm() < 0.005);
    }

    TEST_CASE("interval noise and sitting values") {
        SimpleTrace t;
        t.episodes = {{100, 700, {0.0, 0.10, 0.0}}};
        NodeState s = NodeState::initial(config(), {0, 0, 1});
        run_interval(s, config(), t, 1);
        CHECK(s.noise_db[0] == 55);
        CHECK(s.sitting_min[0] == 10); // 598 s -> (598 + 30) / 60
        CHECK(s.clock.t_s == 1800);
    }

    TEST_CASE("noise mean rounds half up and clamps") {
        SimpleTrace t;
        t.noise_fn = [](std::uint64_t s) { return s % 2 == 0 ? 55.0 : 56.0; };
        NodeState s = NodeState::initial(config(), {0, 0, 1});
        run_interval(s, config(), t, 1);
        CHECK(s.noise_db[0] == 56);
        t.noise_fn = [](std::uint64_t) { return 180.0; };
        run_interval(s, config(), t, 2);
        CHECK(s.noise_db[1] == 140);
    }

    TEST_CASE("GNSS session length follows the fix delay") {
        SimpleTrace t;
        t.fix_delay_s = 42.0;
        NodeState s = NodeState::initial(config(), {0, 0, 1});
        const auto env = run_cycle(s, config(), t, 1);
        REQUIRE(s.energy_trace.size() == 2);
        CHECK(s.energy_trace[0].task == Task::Gnss);
        CHECK(s.energy_trace[0].start_s == 3600.0);
        CHECK(s.energy_trace[0].duration_s == 42.0);
        const auto f = decode_frame_hex(env.payload_hex);
        CHECK((f.debug & debug_bits::kGnssFix) != 0);
        CHECK((f.debug & debug_bits::kGnssTimeout) == 0);
        CHECK(f.position.latitude_e7 == t.position.latitude_e7);
        CHECK(f.position.fix_time_s == 1654473600 + 3600 + 42);
    }

    TEST_CASE("GNSS timeout caps the session at 300 s") {
        SimpleTrace t;
        t.fix_delay_s = 400.0;
        NodeState s = NodeState::initial(config(), {0, 0, 1});
        const auto env = run_cycle(s, config(), t, 1);
        CHECK(s.energy_trace[0].duration_s == 300.0);
        const auto f = decode_frame_hex(env.payload_hex);
        CHECK((f.debug & debug_bits::kGnssTimeout) != 0);
        CHECK((f.debug & debug_bits::kGnssFix) == 0);
        CHECK_FALSE(f.position.has_fix());
    }

    TEST_CASE("last fix is carried into later frames") {
        SimpleTrace t;
        t.fix_delay_fn = [](std::uint64_t ts) { return ts < 7200 ? 30.0 : 1e9; };
        NodeState s = NodeState::initial(config(), {0, 0, 1});
        (void)run_cycle(s, config(), t, 1);
        const auto f = decode_frame_hex(run_cycle(s, config(), t, 1).payload_hex);
        CHECK(f.position.has_fix());
        CHECK(f.debug == debug_bits::kGnssTimeout);
    }

    TEST_CASE("one day: twelve uplinks every 7200 s and cleared accumulators") {
        SimpleTrace t;
        t.fix_delay_s = 120.0;
        t.temperature_fn = [](std::uint64_t ts) { return 20.0 + static_cast<double>(ts) / 7200.0; };
        const auto run = run_node(config(), t, 86400, 9);
        REQUIRE(run.envelopes.size() == 12);
        for (std::size_t i = 0; i < 12; ++i) {
            CHECK(run.envelopes[i].fcnt == i);
            CHECK(run.envelopes[i].received_at == 1654473600 + static_cast<UnixSeconds>(7200 * (i + 1)));
            const auto f = decode_frame_hex(run.envelopes[i].payload_hex);
            // temperature is read at the end of the cycle
            CHECK(f.temperature_cC == static_cast<std::int16_t>(2000 + 100 * (i + 1)));
        }
        for (const auto &e : run.energy_trace) {
            if (e.task != Task::Gnss) continue;
            const auto in_cycle = static_cast<std::uint64_t>(e.start_s) % 7200;
            CHECK(in_cycle >= 3600);
            CHECK(in_cycle + static_cast<std::uint64_t>(e.duration_s) <= 5400);
            CHECK(e.duration_s <= 300.0);
        }
        CHECK(run.final_state.accumulators_clear());
    }

    TEST_CASE("partial trailing cycle emits nothing") {
        SimpleTrace t;
        const auto run = run_node(config(), t, 7200 + 3 * 1800, 1);
        CHECK(run.envelopes.size() == 1);
        CHECK(std::count_if(run.energy_trace.begin(), run.energy_trace.end(),
                            [](const TraceEntry &e) { return e.task == Task::Gnss; }) == 2);
        CHECK_THROWS_AS(run_node(config(), t, 1000, 1), ParamError);
    }

    TEST_CASE("61 days: 732 uplinks, deterministic, ledger matches the closed form") {
        SimpleTrace t;
        const auto a = run_node(config(), t, 61ULL * 86400, 5);
        CHECK(a.envelopes.size() == 732);
        const auto daily = daily_energy_mwh(config().power);
        CHECK(std::abs(a.ledger.total_mwh() / 61.0 - daily.total) / daily.total < 1e-3);
        const auto b = run_node(config(), t, 61ULL * 86400, 5);
        CHECK(a.envelopes == b.envelopes);

        // worst-case draw empties the battery just before the end
        const auto first = decode_frame_hex(a.envelopes.front().payload_hex);
        const auto last = decode_frame_hex(a.envelopes.back().payload_hex);
        CHECK(first.battery_pct == 100);
        CHECK(last.battery_pct == 0);
        CHECK((last.debug & debug_bits::kBatteryLow) != 0);
        CHECK((first.debug & debug_bits::kBatteryLow) == 0);
    }

    TEST_CASE("schedule validation") {
        ScheduleConfig s;
        s.gnss_interval_index = 4;
        CHECK_THROWS_AS(s.validate(), ParamError);
        s = {};
        s.noise_rate_hz = 2;
        CHECK_THROWS_AS(s.validate(), ParamError);
        s = {};
        s.interval_s = 3600;
        CHECK_THROWS_AS(s.validate(), ParamError);
    }
}
