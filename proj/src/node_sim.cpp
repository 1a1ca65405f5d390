#include "urbansense/node_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "urbansense/errors.hpp"
#include "urbansense/random.hpp"

namespace urbansense {

void ScheduleConfig::validate() const {
    if (interval_s <= 0) throw ParamError("interval_s must be positive");
    if (intervals_per_cycle < 2 || intervals_per_cycle > static_cast<int>(kIntervalsPerFrame)) {
        throw ParamError("intervals_per_cycle must be in [2, 4]");
    }
    if (gnss_interval_index != intervals_per_cycle - 1) {
        throw ParamError("GNSS must run in the second-last interval");
    }
    if (gnss_max_s <= 0 || gnss_max_s > interval_s) throw ParamError("gnss_max_s must be in (0, interval_s]");
    if (accel_rate_hz <= 0) throw ParamError("accel_rate_hz must be positive");
    if (noise_rate_hz != 1) throw ParamError("noise_rate_hz must be 1 (one 1 s average per read)");
    // Each interval's sitting minutes must fit the frame's 0..30 range.
    if ((interval_s + 30) / 60 > kMaxSittingMin) throw ParamError("interval_s too long for sitting minutes");
}

void DetectorConfig::validate() const {
    if (!(enter_threshold_g > exit_threshold_g)) throw ParamError("enter threshold must exceed exit threshold");
    if (exit_threshold_g < 0.0) throw ParamError("thresholds must be non-negative");
    if (enter_debounce_s < 1 || exit_debounce_s < 1) throw ParamError("debounce must be at least 1 s");
}

OccupancyDetector::OccupancyDetector(DetectorConfig config, Vec3 baseline)
    : config_(config), baseline_(baseline) {
    config_.validate();
}

bool OccupancyDetector::step(std::span<const Vec3> samples) {
    if (samples.empty()) throw SampleError("no accelerometer samples for this second");
    Vec3 sum{};
    for (const auto &s : samples) sum = sum + s;
    const Vec3 mean = sum * (1.0 / static_cast<double>(samples.size()));
    const double dev = (mean - baseline_).norm();
    last_deviation_ = dev;

    if (state_ == Occupancy::Idle) {
        run_s_ = dev >= config_.enter_threshold_g ? run_s_ + 1 : 0;
        if (run_s_ >= config_.enter_debounce_s) {
            state_ = Occupancy::Occupied;
            run_s_ = 0;
        }
    } else {
        run_s_ = dev < config_.exit_threshold_g ? run_s_ + 1 : 0;
        if (run_s_ >= config_.exit_debounce_s) {
            state_ = Occupancy::Idle;
            run_s_ = 0;
        }
    }
    const bool occupied = state_ == Occupancy::Occupied && dev >= config_.exit_threshold_g;
    if (occupied) ++occupied_s_;
    return occupied;
}

const SittingEpisode *episode_at(std::span<const SittingEpisode> episodes, std::uint64_t t_s) {
    auto it = std::upper_bound(episodes.begin(), episodes.end(), t_s,
                               [](std::uint64_t t, const SittingEpisode &e) { return t < e.start_s; });
    if (it == episodes.begin()) return nullptr;
    --it;
    return t_s < it->end_s ? &*it : nullptr;
}

double SimpleTrace::temperature_c(std::uint64_t t_s) const {
    return temperature_fn ? temperature_fn(t_s) : temperature;
}
double SimpleTrace::humidity_rh(std::uint64_t t_s) const { return humidity_fn ? humidity_fn(t_s) : humidity; }
double SimpleTrace::noise_db(std::uint64_t t_s) const { return noise_fn ? noise_fn(t_s) : noise; }
double SimpleTrace::gnss_fix_delay_s(std::uint64_t t_s) const {
    return fix_delay_fn ? fix_delay_fn(t_s) : fix_delay_s;
}
GeoPosition SimpleTrace::fix_position(std::uint64_t) const { return position; }

void SimpleTrace::accel_second(std::uint64_t t_s, std::span<Vec3> out) const {
    Vec3 level = baseline;
    if (const auto *ep = episode_at(episodes, t_s)) level = level + ep->deviation_g;
    if (accel_noise_g <= 0.0) {
        std::fill(out.begin(), out.end(), level);
        return;
    }
    FastRng rng(hash_keys({seed, t_s}));
    for (auto &s : out) {
        s = {level.x + rng.uniform(-accel_noise_g, accel_noise_g), level.y + rng.uniform(-accel_noise_g, accel_noise_g),
             level.z + rng.uniform(-accel_noise_g, accel_noise_g)};
    }
}

void to_json(nlohmann::json &j, const Event &e) {
    j = nlohmann::json{{"t", format_rfc3339(e.t)}, {"node", e.node}, {"event", e.event}, {"detail", e.detail}};
}

NodeState NodeState::initial(const NodeConfig &config, Vec3 baseline) {
    NodeState s;
    s.identity = config.identity;
    s.clock = SimTime{0, config.epoch_utc};
    s.detector = OccupancyDetector(config.detector, baseline);
    return s;
}

bool NodeState::accumulators_clear() const {
    const auto zero = [](const auto &a) { return std::all_of(a.begin(), a.end(), [](auto v) { return v == 0; }); };
    return noise_sum == 0.0 && noise_count == 0 && detector.occupied_s_this_interval() == 0 && zero(sitting_min) &&
           zero(noise_db) && debug == 0;
}

Vec3 calibrate_baseline(const EnvTrace &trace, std::uint64_t t_s, int seconds, int rate_hz) {
    if (seconds <= 0 || rate_hz <= 0) throw ParamError("calibration needs at least one sample");
    std::vector<Vec3> buf(static_cast<std::size_t>(rate_hz));
    Vec3 sum{};
    for (int s = 0; s < seconds; ++s) {
        trace.accel_second(t_s + static_cast<std::uint64_t>(s), buf);
        for (const auto &v : buf) sum = sum + v;
    }
    return sum * (1.0 / (static_cast<double>(seconds) * rate_hz));
}

namespace {

void log_event(std::vector<Event> *log, const NodeState &state, std::uint64_t t_s, std::string event,
               std::string detail) {
    if (log == nullptr) return;
    log->push_back({state.clock.epoch_utc + static_cast<UnixSeconds>(t_s), state.identity.dev_eui, std::move(event),
                    std::move(detail)});
}

std::uint8_t battery_percent(const NodeState &state, const NodeConfig &config) {
    const double used =
        config.power.p_background_mw * static_cast<double>(state.clock.t_s) / 3600.0 + state.task_energy_mwh;
    const double left = 1.0 - used / config.battery.usable_energy_mwh;
    return static_cast<std::uint8_t>(std::clamp(std::floor(left * 100.0 + 0.5), 0.0, 100.0));
}

} // namespace

void run_interval(NodeState &state, const NodeConfig &config, const EnvTrace &trace, int idx, std::vector<Event> *log) {
    const auto &sched = config.schedule;
    if (idx < 1 || idx > sched.intervals_per_cycle) throw ParamError("interval index out of range");
    const std::uint64_t t0 = state.clock.t_s;

    if (idx == sched.gnss_interval_index) {
        const double delay = trace.gnss_fix_delay_s(t0);
        const double cap = sched.gnss_max_s;
        double session = cap;
        if (delay <= cap) {
            session = std::max(delay, 0.0);
            GeoPosition fix = trace.fix_position(t0 + static_cast<std::uint64_t>(session));
            fix.fix_time_s = static_cast<std::uint32_t>(state.clock.epoch_utc + static_cast<UnixSeconds>(t0) +
                                                        static_cast<UnixSeconds>(std::llround(session)));
            state.last_fix = fix;
            state.debug |= debug_bits::kGnssFix;
            log_event(log, state, t0, "gnss_fix", "delay_s=" + std::to_string(std::llround(session)));
        } else {
            state.debug |= debug_bits::kGnssTimeout;
            log_event(log, state, t0, "gnss_timeout", "session_s=" + std::to_string(sched.gnss_max_s));
        }
        state.energy_trace.push_back({Task::Gnss, static_cast<double>(t0), session});
        state.task_energy_mwh += config.power.p_gnss_mw * session / 3600.0;
    }

    std::vector<Vec3> samples(static_cast<std::size_t>(sched.accel_rate_hz));
    Occupancy prev = state.detector.state();
    for (int s = 0; s < sched.interval_s; ++s) {
        const std::uint64_t t = t0 + static_cast<std::uint64_t>(s);
        state.noise_sum += trace.noise_db(t);
        ++state.noise_count;
        trace.accel_second(t, samples);
        state.detector.step(samples);
        if (state.detector.state() != prev) {
            prev = state.detector.state();
            log_event(log, state, t, prev == Occupancy::Occupied ? "sit_start" : "sit_end", "");
        }
    }

    const int occupied_s = state.detector.occupied_s_this_interval();
    const auto sitting = static_cast<std::uint8_t>((occupied_s + 30) / 60);
    const double mean_noise = state.noise_sum / state.noise_count;
    const auto noise = static_cast<std::uint8_t>(std::clamp(std::floor(mean_noise + 0.5), 0.0, double{kMaxNoiseDb}));
    state.sitting_min[static_cast<std::size_t>(idx - 1)] = sitting;
    state.noise_db[static_cast<std::size_t>(idx - 1)] = noise;

    state.detector.reset_interval();
    state.noise_sum = 0.0;
    state.noise_count = 0;
    state.clock.t_s += static_cast<std::uint64_t>(sched.interval_s);
    log_event(log, state, state.clock.t_s, "interval_end",
              "idx=" + std::to_string(idx) + " sitting_min=" + std::to_string(sitting) +
                  " noise_db=" + std::to_string(noise));
}

UplinkEnvelope run_cycle(NodeState &state, const NodeConfig &config, const EnvTrace &trace, std::uint64_t seed,
                         std::vector<Event> *log) {
    for (int idx = 1; idx <= config.schedule.intervals_per_cycle; ++idx) run_interval(state, config, trace, idx, log);

    const std::uint64_t t = state.clock.t_s;
    SensorFrame frame;
    frame.header = kLayoutV1;
    state.battery_pct = battery_percent(state, config);
    frame.battery_pct = state.battery_pct;
    frame.debug = state.debug;
    if (state.battery_pct <= config.battery_low_pct) frame.debug |= debug_bits::kBatteryLow;
    frame.position = state.last_fix;
    const double temp = std::round(trace.temperature_c(t) * 100.0);
    frame.temperature_cC = static_cast<std::int16_t>(std::clamp(temp, -32768.0, 32767.0));
    const double hum = std::round(trace.humidity_rh(t) * 100.0);
    frame.humidity_cRH = static_cast<std::uint16_t>(std::clamp(hum, 0.0, double{kMaxHumidityCRH}));
    frame.sitting_min = state.sitting_min;
    frame.noise_db = state.noise_db;

    UplinkEnvelope env;
    env.dev_eui = state.identity.dev_eui;
    env.fcnt = state.frame_counter;
    env.port = config.port;
    env.payload_hex = encode_frame_hex(frame);
    const std::uint64_t h = hash_keys({seed, hash_string(env.dev_eui), env.fcnt});
    env.rssi_dbm = -95 - static_cast<int>(h % 25);
    env.snr_db = static_cast<double>(static_cast<int>((h >> 16) % 200) - 150) / 10.0;
    env.received_at = state.clock.unix_time();

    state.energy_trace.push_back({Task::LoraUplink, static_cast<double>(t), config.power.uplink_active_s});
    state.task_energy_mwh += config.power.e_uplink_mwh;
    log_event(log, state, t, "uplink", "fcnt=" + std::to_string(env.fcnt));

    ++state.frame_counter;
    state.debug = 0;
    state.sitting_min.fill(0);
    state.noise_db.fill(0);
    return env;
}

NodeRun run_node(const NodeConfig &config, const EnvTrace &trace, std::uint64_t duration_s, std::uint64_t seed) {
    config.schedule.validate();
    const auto interval = static_cast<std::uint64_t>(config.schedule.interval_s);
    const auto cycle = static_cast<std::uint64_t>(config.schedule.cycle_s());
    if (duration_s % interval != 0) throw ParamError("duration must be a multiple of the interval length");

    NodeRun run;
    const Vec3 baseline = calibrate_baseline(trace, 0, config.calibration_s, config.schedule.accel_rate_hz);
    NodeState state = NodeState::initial(config, baseline);
    run.envelopes.reserve(duration_s / cycle);
    while (state.clock.t_s + cycle <= duration_s) {
        run.envelopes.push_back(run_cycle(state, config, trace, seed, &run.events));
    }
    for (int idx = 1; state.clock.t_s < duration_s; ++idx) run_interval(state, config, trace, idx, &run.events);

    run.energy_trace = state.energy_trace;
    run.ledger = energy_ledger(run.energy_trace, config.power, static_cast<double>(duration_s));
    run.final_state = std::move(state);
    return run;
}

} // namespace urbansense
