#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "urbansense/codec.hpp"
#include "urbansense/energy.hpp"
#include "urbansense/envelope.hpp"
#include "urbansense/geo.hpp"
#include "urbansense/time.hpp"

namespace urbansense {

struct ScheduleConfig {
    int interval_s = 1800;
    int intervals_per_cycle = 4;
    int gnss_interval_index = 3; ///< 1-based; second-last interval
    int gnss_max_s = 300;
    int accel_rate_hz = 26;
    int noise_rate_hz = 1;

    [[nodiscard]] int cycle_s() const { return interval_s * intervals_per_cycle; }
    /// Throws ParamError.
    void validate() const;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(Vec3 a, double k) { return {a.x * k, a.y * k, a.z * k}; }
    [[nodiscard]] double norm() const { return std::sqrt(x * x + y * y + z * z); }
    friend bool operator==(const Vec3 &, const Vec3 &) = default;
};

struct DetectorConfig {
    double enter_threshold_g = 0.05;
    double exit_threshold_g = 0.03;
    int enter_debounce_s = 3;
    int exit_debounce_s = 10;

    /// Throws ParamError.
    void validate() const;
};

enum class Occupancy { Idle, Occupied };

/// Per-second sitting detector.
///
/// Each second the mean of the accelerometer samples is compared against
/// the empty-chair baseline. IDLE -> OCCUPIED needs `enter_debounce_s`
/// consecutive seconds at or above the enter threshold; OCCUPIED -> IDLE
/// needs `exit_debounce_s` consecutive seconds below the exit threshold.
/// A second counts as occupied when the detector is OCCUPIED after the
/// update and the deviation is still at or above the exit threshold, so
/// the exit debounce never adds phantom occupancy.
class OccupancyDetector {
public:
    explicit OccupancyDetector(DetectorConfig config = {}, Vec3 baseline = {0.0, 0.0, 1.0});

    /// Throws SampleError on an empty sample list.
    bool step(std::span<const Vec3> samples);

    [[nodiscard]] Occupancy state() const { return state_; }
    [[nodiscard]] int occupied_s_this_interval() const { return occupied_s_; }
    [[nodiscard]] double last_deviation_g() const { return last_deviation_; }
    [[nodiscard]] const DetectorConfig &config() const { return config_; }
    [[nodiscard]] Vec3 baseline() const { return baseline_; }
    void reset_interval() { occupied_s_ = 0; }

private:
    DetectorConfig config_;
    Vec3 baseline_;
    Occupancy state_ = Occupancy::Idle;
    int run_s_ = 0; ///< consecutive seconds pushing toward the other state
    int occupied_s_ = 0;
    double last_deviation_ = 0.0;
};

/// Time functions a node observes. `t_s` is seconds since the simulation epoch.
class EnvTrace {
public:
    virtual ~EnvTrace() = default;

    virtual double temperature_c(std::uint64_t t_s) const = 0;
    virtual double humidity_rh(std::uint64_t t_s) const = 0;
    virtual double noise_db(std::uint64_t t_s) const = 0;
    /// Fills `out` with the samples of second `t_s` (out.size() == rate).
    virtual void accel_second(std::uint64_t t_s, std::span<Vec3> out) const = 0;
    /// Seconds to first fix when the receiver powers up at `t_s`;
    /// infinity when there is no reception.
    virtual double gnss_fix_delay_s(std::uint64_t t_s) const = 0;
    /// Reported position (fix_time_s is filled in by the node).
    virtual GeoPosition fix_position(std::uint64_t t_s) const = 0;
};

struct SittingEpisode {
    std::uint64_t start_s = 0;
    std::uint64_t end_s = 0; ///< exclusive
    Vec3 deviation_g{};
};

/// Constant environment with optional sitting episodes and per-quantity
/// overrides. The default has no GNSS reception (worst case for energy).
class SimpleTrace : public EnvTrace {
public:
    double temperature = 20.0;
    double humidity = 50.0;
    double noise = 55.0;
    Vec3 baseline{0.0, 0.0, 1.0};
    double accel_noise_g = 0.0; ///< uniform per-axis half-width
    std::uint64_t seed = 1;
    double fix_delay_s = std::numeric_limits<double>::infinity();
    GeoPosition position = GeoPosition::from_degrees(47.3661230, 8.5517310, 25);
    std::vector<SittingEpisode> episodes; ///< sorted, non-overlapping

    std::function<double(std::uint64_t)> temperature_fn;
    std::function<double(std::uint64_t)> humidity_fn;
    std::function<double(std::uint64_t)> noise_fn;
    std::function<double(std::uint64_t)> fix_delay_fn;

    double temperature_c(std::uint64_t t_s) const override;
    double humidity_rh(std::uint64_t t_s) const override;
    double noise_db(std::uint64_t t_s) const override;
    void accel_second(std::uint64_t t_s, std::span<Vec3> out) const override;
    double gnss_fix_delay_s(std::uint64_t t_s) const override;
    GeoPosition fix_position(std::uint64_t t_s) const override;
};

/// Binary search over sorted, non-overlapping episodes.
const SittingEpisode *episode_at(std::span<const SittingEpisode> episodes, std::uint64_t t_s);

struct NodeConfig {
    NodeIdentity identity{"0000000000000001", "node"};
    UnixSeconds epoch_utc = 0;
    ScheduleConfig schedule{};
    DetectorConfig detector{};
    PowerProfile power{};
    BatteryModel battery{};
    int port = 2;
    int battery_low_pct = 10;
    int calibration_s = 5; ///< seconds averaged for the empty-chair baseline
};

struct Event {
    UnixSeconds t = 0;
    std::string node;
    std::string event;
    std::string detail;
};

void to_json(nlohmann::json &j, const Event &e);

struct NodeState {
    NodeIdentity identity;
    SimTime clock;
    OccupancyDetector detector;
    double noise_sum = 0.0;
    std::uint32_t noise_count = 0;
    std::array<std::uint8_t, kIntervalsPerFrame> sitting_min{};
    std::array<std::uint8_t, kIntervalsPerFrame> noise_db{};
    GeoPosition last_fix = GeoPosition::no_fix();
    std::uint8_t battery_pct = 100;
    std::uint32_t frame_counter = 0;
    std::uint8_t debug = 0; ///< flags collected during the current cycle
    std::vector<TraceEntry> energy_trace;
    double task_energy_mwh = 0.0;

    static NodeState initial(const NodeConfig &config, Vec3 baseline);
    /// True when the current-interval accumulators and per-cycle values are clear.
    [[nodiscard]] bool accumulators_clear() const;
};

/// Averages `seconds` of samples starting at `t_s`.
Vec3 calibrate_baseline(const EnvTrace &trace, std::uint64_t t_s, int seconds, int rate_hz);

/// Runs sampling interval `idx` (1-based) starting at the state's clock.
void run_interval(NodeState &state, const NodeConfig &config, const EnvTrace &trace, int idx,
                  std::vector<Event> *log = nullptr);

/// Runs one full cycle, samples temperature/humidity, builds the frame and
/// returns the uplink. The envelope's RSSI/SNR are derived from `seed`.
UplinkEnvelope run_cycle(NodeState &state, const NodeConfig &config, const EnvTrace &trace,
                         std::uint64_t seed, std::vector<Event> *log = nullptr);

struct NodeRun {
    std::vector<UplinkEnvelope> envelopes;
    std::vector<TraceEntry> energy_trace;
    EnergyLedger ledger;
    std::vector<Event> events;
    NodeState final_state;
};

/// Throws ParamError unless duration_s is a multiple of the interval length.
NodeRun run_node(const NodeConfig &config, const EnvTrace &trace, std::uint64_t duration_s,
                 std::uint64_t seed);

} // namespace urbansense
