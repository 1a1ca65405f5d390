#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "urbansense/time.hpp"

namespace urbansense {

struct ReferenceSample {
    UnixSeconds t = 0;
    double temperature_c = 0.0;
    bool raining = false;
    friend bool operator==(const ReferenceSample &, const ReferenceSample &) = default;
};

/// City reference sensor: temperature and rainfall over time.
struct ReferenceSeries {
    std::vector<ReferenceSample> samples;

    /// Throws DomainError unless timestamps are strictly increasing.
    void validate() const;
    /// Linear interpolation; nullopt outside [first, last].
    [[nodiscard]] std::optional<double> temperature_at(UnixSeconds t) const;
    /// Mean of the samples falling on each UTC date ("YYYY-MM-DD").
    [[nodiscard]] std::map<std::string, double> daily_mean_temperature() const;
    [[nodiscard]] bool empty() const { return samples.empty(); }
};

} // namespace urbansense
