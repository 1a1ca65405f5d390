#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "urbansense/channel.hpp"
#include "urbansense/geo.hpp"
#include "urbansense/node_sim.hpp"
#include "urbansense/reference.hpp"

namespace urbansense {

struct NodePlacement {
    NodeIdentity identity;
    std::string square_id;
    double lat = 0.0;
    double lon = 0.0;
    bool sun_exposed = false;
    std::optional<double> dropout_day; ///< days after the epoch
};

struct ColdSpell {
    int start_day = 0;
    int days = 1;
    double temp_min_c = 8.0;
    double temp_max_c = 16.0;
};

struct RainEvent {
    int day = 0;
    double start_h = 0.0;
    double duration_h = 1.0;
};

struct WeatherConfig {
    double temp_min_c = 16.0;
    double temp_max_c = 29.0;
    double day_jitter_c = 1.0; ///< per-day shift of the min/max pair
    std::vector<ColdSpell> cold_spells;
    std::vector<RainEvent> rain_events;
    double sun_offset_c = 14.0;   ///< peak housing heating in direct sun
    double shade_offset_c = 0.8;  ///< peak heating in shade
    double dry_humidity_rh = 55.0;
    double humidity_swing_rh = 12.0;
    double overcast_lead_h = 2.0; ///< visitors are deterred this long before rain
    int reference_step_s = 600;
};

/// Arrival intensities in arrivals per hour for one chair.
struct VisitorProfile {
    double daytime_per_h = 0.3;   ///< weekdays 08:00-20:00
    double lunch_peak_per_h = 3.0;
    double lunch_center_h = 12.5;
    double lunch_width_h = 0.5;   ///< Gaussian sigma
    double evening_per_h = 0.0;
    double evening_start_h = 17.0;
    double evening_end_h = 20.0;
    double weekend_per_h = 0.4;   ///< weekends 09:00-20:00
    double weekend_evening_per_h = 0.0; ///< weekends 20:00-23:00
    double mean_duration_min = 20.0;
    double rain_aversion = 0.1;   ///< intensity multiplier during rain
    double rain_max_duration_min = 5.0;
    double cold_cutoff_c = 15.0;
    double cold_factor = 0.0;     ///< intensity multiplier on cold days
};

struct GnssConfig {
    double fix_min_s = 20.0;
    double fix_max_s = 150.0;
    double no_reception_probability = 0.05;
    int accuracy_min_dm = 15;
    int accuracy_max_dm = 60;
};

struct Scenario {
    std::uint64_t seed = 1;
    int duration_days = 61;
    UnixSeconds epoch_utc = 0;
    std::vector<SquareDefinition> squares;
    std::vector<NodePlacement> nodes;
    WeatherConfig weather;
    std::map<std::string, VisitorProfile> visitors; ///< by square id
    GnssConfig gnss;
    double loss_probability = 0.0;
};

/// Throws ScenarioError with the JSON path (and line, when parsing text).
Scenario parse_scenario(std::string_view json_text);
Scenario scenario_from_json(const nlohmann::json &j);
/// Throws ScenarioError naming the path when the file cannot be read.
Scenario load_scenario(const std::filesystem::path &path);
nlohmann::json scenario_to_json(const Scenario &s);
/// Semantic checks (placements inside squares, dropout within duration, ...).
void validate_scenario(const Scenario &s);

/// Two squares (M: city centre, V: by the station), sixteen chairs, five of
/// which drop out, 61 days from Monday 2022-06-06.
Scenario default_scenario();

/// Shared weather: reference temperature, rain and humidity.
class WeatherModel {
public:
    WeatherModel(const WeatherConfig &cfg, UnixSeconds epoch, int duration_days, std::uint64_t seed);

    [[nodiscard]] double reference_temperature(UnixSeconds t) const;
    [[nodiscard]] double day_min(int day) const;
    [[nodiscard]] double day_max(int day) const;
    [[nodiscard]] double day_mean(int day) const { return 0.5 * (day_min(day) + day_max(day)); }
    [[nodiscard]] bool raining(UnixSeconds t) const;
    /// Rain or its overcast lead-in.
    [[nodiscard]] bool deterring(UnixSeconds t) const;
    /// Start of the next deterring period strictly after `t`, if any.
    [[nodiscard]] std::optional<UnixSeconds> next_deterring_onset(UnixSeconds t) const;
    /// No rain overlapping the daytime window of `day`.
    [[nodiscard]] bool clear_daytime(int day, double start_h = 10.0, double end_h = 16.0) const;
    /// Fraction of clear-sky solar heating in [0, 1].
    [[nodiscard]] double solar(UnixSeconds t) const;
    [[nodiscard]] double humidity(UnixSeconds t) const;
    [[nodiscard]] int day_index(UnixSeconds t) const;
    [[nodiscard]] int days() const { return static_cast<int>(min_.size()); }
    [[nodiscard]] UnixSeconds epoch() const { return epoch_; }

private:
    struct Span {
        UnixSeconds start;
        UnixSeconds end;
    };
    [[nodiscard]] const Span *rain_at_or_before(UnixSeconds t) const;

    WeatherConfig cfg_;
    UnixSeconds epoch_;
    std::vector<double> min_, max_;
    std::vector<Span> rain_;
};

struct NodeWorld {
    NodeConfig config;
    std::shared_ptr<const EnvTrace> trace;
    std::vector<SittingEpisode> episodes; ///< ground truth
    std::string square_id;
    bool sun_exposed = false;
    std::optional<UnixSeconds> dropout_at;
};

struct World {
    std::vector<NodeWorld> nodes;
    std::shared_ptr<const WeatherModel> weather;
    ReferenceSeries reference;
    ChannelModel channel;
    std::vector<SquareDefinition> squares;
};

/// Deterministic given the scenario seed. Throws ScenarioError.
World build_world(const Scenario &s);

/// Visitor intensity (arrivals per hour) for a chair on `square` at `t`.
double visitor_intensity(const VisitorProfile &v, const WeatherModel &w, UnixSeconds t);

} // namespace urbansense
