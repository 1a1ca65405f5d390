#include "urbansense/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "urbansense/errors.hpp"

namespace urbansense {

namespace {

// Absorbs rounding in differences of differences at the decision boundary.
constexpr double kBoundaryEps = 1e-9;

} // namespace

std::string_view exposure_name(Exposure e) { return e == Exposure::Sun ? "sun" : "shade"; }

std::vector<TemperatureSample> temperature_series(std::span<const MeasurementRecord> records,
                                                  std::string_view dev_eui) {
    std::vector<TemperatureSample> out;
    for (const auto &r : records) {
        if (r.dev_eui == dev_eui) out.push_back({r.received_at, r.frame.temperature_cC / 100.0});
    }
    std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.t < b.t; });
    return out;
}

std::vector<ExposureDay> sun_exposure_classify(std::span<const TemperatureSample> node, const ReferenceSeries &ref,
                                               DaytimeWindow window, double delta_c) {
    if (!(delta_c > 0.0)) throw ParamError("delta_c must be positive");
    if (!(window.start_h < window.end_h)) throw ParamError("daytime window is empty");

    std::map<std::string, std::pair<double, int>> days;
    std::size_t overlapping = 0;
    for (const auto &s : node) {
        const auto r = ref.temperature_at(s.t);
        if (!r) continue;
        ++overlapping;
        const double h = hour_of_day(s.t);
        if (h < window.start_h || h >= window.end_h) continue;
        auto &[sum, n] = days[format_date(s.t)];
        sum += s.temperature_c - *r;
        ++n;
    }
    if (overlapping == 0) throw CoverageError("no node sample overlaps the reference series");

    std::vector<ExposureDay> out;
    for (const auto &[date, acc] : days) {
        const double mean = acc.first / acc.second;
        out.push_back({date, mean >= delta_c - kBoundaryEps ? Exposure::Sun : Exposure::Shade, mean, acc.second});
    }
    return out;
}

bool rain_flag(double humidity_rh) {
    if (!(humidity_rh >= 0.0 && humidity_rh <= 100.0)) throw RangeError("humidity_rh", "must be within [0, 100]");
    return humidity_rh >= kRainHumidityRh;
}

HumidityOccupancy occupancy_vs_humidity(std::span<const MeasurementRecord> records, std::string_view square_id,
                                        double humidity_split_rh, int sitting_split_min) {
    HumidityOccupancy out;
    for (const auto &r : records) {
        if (!r.square_id || *r.square_id != square_id) continue;
        const double h = r.frame.humidity_cRH / 100.0;
        for (auto s : r.frame.sitting_min) {
            if (s == kInvalidByte) continue;
            out.points.push_back({h, s});
            const bool wet = h >= humidity_split_rh;
            const bool high = s >= sitting_split_min;
            auto &q = out.quadrants;
            ++(wet ? (high ? q.wet_high : q.wet_low) : (high ? q.dry_high : q.dry_low));
        }
    }
    return out;
}

HourlyProfile hourly_profile(std::span<const MeasurementRecord> records, std::string_view square_id, double bin_h,
                             int interval_s) {
    if (!(bin_h > 0.0)) throw ParamError("bin_h must be positive");
    const double nb = 24.0 / bin_h;
    const long nbins = std::lround(nb);
    if (nbins < 1 || std::abs(nb - static_cast<double>(nbins)) > 1e-9) throw ParamError("bin_h must divide 24 h");
    if (interval_s <= 0) throw ParamError("interval_s must be positive");

    HourlyProfile p;
    p.bin_h = bin_h;
    p.weekday.assign(static_cast<std::size_t>(nbins), 0.0);
    p.weekend.assign(static_cast<std::size_t>(nbins), 0.0);
    const double bin_s = 86400.0 / static_cast<double>(nbins);

    for (const auto &r : records) {
        if (!r.square_id || *r.square_id != square_id) continue;
        for (const auto &row : r.intervals(interval_s)) {
            if (row.sitting_min == kInvalidByte || row.sitting_min == 0) continue;
            auto &bins = is_weekend(row.interval_start) ? p.weekend : p.weekday;
            const double start = static_cast<double>(second_of_day(row.interval_start));
            const double end = start + interval_s;
            const double per_s = row.sitting_min / static_cast<double>(interval_s);
            for (auto b = static_cast<long>(std::floor(start / bin_s)); b * bin_s < end; ++b) {
                const double lo = std::max(start, b * bin_s);
                const double hi = std::min(end, (b + 1) * bin_s);
                if (hi > lo) bins[static_cast<std::size_t>(b % nbins)] += per_s * (hi - lo);
            }
        }
    }
    for (auto &v : p.weekday) v /= 5.0;
    for (auto &v : p.weekend) v /= 2.0;
    return p;
}

std::vector<DailySitting> daily_sitting_vs_temperature(std::span<const MeasurementRecord> records,
                                                       const ReferenceSeries &ref,
                                                       std::span<const std::string> squares, int interval_s) {
    const auto means = ref.daily_mean_temperature();
    std::set<std::string> square_ids(squares.begin(), squares.end());
    std::map<std::pair<std::string, std::string>, int> totals;
    std::set<std::string> missing;
    for (const auto &r : records) {
        if (!r.square_id) continue;
        square_ids.insert(*r.square_id);
        for (const auto &row : r.intervals(interval_s)) {
            const std::string date = format_date(row.interval_start);
            if (!means.contains(date)) {
                missing.insert(date);
                continue;
            }
            if (row.sitting_min != kInvalidByte) totals[{date, *r.square_id}] += row.sitting_min;
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto &d : missing) list += (list.empty() ? "" : ", ") + d;
        throw CoverageError("reference does not cover " + list, {missing.begin(), missing.end()});
    }

    std::vector<DailySitting> out;
    for (const auto &[date, mean] : means) {
        for (const auto &sq : square_ids) {
            auto it = totals.find({date, sq});
            out.push_back({date, sq, it == totals.end() ? 0 : it->second, mean});
        }
    }
    return out;
}

void to_json(nlohmann::json &j, const ExposureDay &d) {
    j = nlohmann::json{{"date", d.date},
                       {"label", exposure_name(d.label)},
                       {"mean_delta_c", d.mean_delta_c},
                       {"samples", d.samples}};
}

void to_json(nlohmann::json &j, const HumidityOccupancy &h) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto &p : h.points) pts.push_back({p.humidity_rh, p.sitting_min});
    j = nlohmann::json{{"points", pts},
                       {"quadrants",
                        {{"dry_low", h.quadrants.dry_low},
                         {"dry_high", h.quadrants.dry_high},
                         {"wet_low", h.quadrants.wet_low},
                         {"wet_high", h.quadrants.wet_high}}}};
}

void to_json(nlohmann::json &j, const HourlyProfile &p) {
    j = nlohmann::json{{"bin_h", p.bin_h},
                       {"weekday", p.weekday},
                       {"weekend", p.weekend},
                       {"lunch_hour", {{"start_h", p.lunch_start_h}, {"end_h", p.lunch_end_h}}}};
}

void to_json(nlohmann::json &j, const DailySitting &d) {
    j = nlohmann::json{{"date", d.date},
                       {"square_id", d.square_id},
                       {"total_sitting_min", d.total_sitting_min},
                       {"ref_mean_temp_c", d.ref_mean_temp_c}};
}

} // namespace urbansense
