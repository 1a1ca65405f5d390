#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "urbansense/measurement.hpp"
#include "urbansense/reference.hpp"

namespace urbansense {

struct TemperatureSample {
    UnixSeconds t = 0;
    double temperature_c = 0.0;
};

/// Hours of the day, half-open [start_h, end_h).
struct DaytimeWindow {
    double start_h = 10.0;
    double end_h = 16.0;
};

enum class Exposure { Sun, Shade };
std::string_view exposure_name(Exposure e);

struct ExposureDay {
    std::string date;
    Exposure label = Exposure::Shade;
    double mean_delta_c = 0.0;
    int samples = 0;
};

/// Temperatures of one device, in time order.
std::vector<TemperatureSample> temperature_series(std::span<const MeasurementRecord> records,
                                                  std::string_view dev_eui);

/// Labels each day "sun" when the mean node-minus-reference deviation over
/// the daytime window is at least `delta_c`. Days without an in-window
/// sample covered by the reference are skipped. Throws CoverageError when
/// no sample overlaps the reference at all, ParamError if delta_c <= 0.
std::vector<ExposureDay> sun_exposure_classify(std::span<const TemperatureSample> node,
                                               const ReferenceSeries &ref, DaytimeWindow window = {},
                                               double delta_c = 5.0);

inline constexpr double kRainHumidityRh = 80.0;

/// humidity >= 80 %RH. Throws RangeError outside [0, 100].
bool rain_flag(double humidity_rh);

struct ScatterPoint {
    double humidity_rh = 0.0;
    int sitting_min = 0;
};

/// Split at 80 %RH (x) and 15 min (y); "high" sides are inclusive.
struct QuadrantCounts {
    std::size_t dry_low = 0;  ///< lower left
    std::size_t dry_high = 0; ///< upper left
    std::size_t wet_low = 0;  ///< lower right
    std::size_t wet_high = 0; ///< upper right
};

struct HumidityOccupancy {
    std::vector<ScatterPoint> points;
    QuadrantCounts quadrants;
};

/// One point per (frame, interval) of the square; each interval is paired
/// with its frame's humidity. Invalid (0xFF) sitting values are skipped.
HumidityOccupancy occupancy_vs_humidity(std::span<const MeasurementRecord> records, std::string_view square_id,
                                        double humidity_split_rh = kRainHumidityRh, int sitting_split_min = 15);

struct HourlyProfile {
    double bin_h = 0.25;
    std::vector<double> weekday; ///< sitting minutes per bin / 5
    std::vector<double> weekend; ///< sitting minutes per bin / 2
    double lunch_start_h = 12.0;
    double lunch_end_h = 13.0;
};

/// Sitting minutes accumulated by time of day of the interval. An
/// interval's minutes are spread over the bins it overlaps in proportion
/// to the overlap. Throws ParamError unless bin_h divides 24 h.
HourlyProfile hourly_profile(std::span<const MeasurementRecord> records, std::string_view square_id,
                             double bin_h = 0.25, int interval_s = kDefaultIntervalS);

struct DailySitting {
    std::string date;
    std::string square_id;
    int total_sitting_min = 0;
    double ref_mean_temp_c = 0.0;
};

/// Per-day, per-square sitting totals (by interval start) joined with the
/// reference's daily mean temperature. Every reference day is emitted for
/// every square, with zero totals when nothing was recorded. Squares come
/// from the records plus `squares`. Throws CoverageError listing record
/// dates the reference does not cover.
std::vector<DailySitting> daily_sitting_vs_temperature(std::span<const MeasurementRecord> records,
                                                       const ReferenceSeries &ref,
                                                       std::span<const std::string> squares = {},
                                                       int interval_s = kDefaultIntervalS);

void to_json(nlohmann::json &j, const ExposureDay &d);
void to_json(nlohmann::json &j, const HumidityOccupancy &h);
void to_json(nlohmann::json &j, const HourlyProfile &p);
void to_json(nlohmann::json &j, const DailySitting &d);

} // namespace urbansense
