#include "urbansense/reference.hpp"

#include <algorithm>

#include "urbansense/errors.hpp"

namespace urbansense {

void ReferenceSeries::validate() const {
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (samples[i].t <= samples[i - 1].t) {
            throw DomainError("reference timestamps must strictly increase (at " + format_rfc3339(samples[i].t) + ")");
        }
    }
}

std::optional<double> ReferenceSeries::temperature_at(UnixSeconds t) const {
    if (samples.empty() || t < samples.front().t || t > samples.back().t) return std::nullopt;
    auto it = std::lower_bound(samples.begin(), samples.end(), t,
                               [](const ReferenceSample &s, UnixSeconds v) { return s.t < v; });
    if (it->t == t) return it->temperature_c;
    const auto &hi = *it;
    const auto &lo = *(it - 1);
    const double f = static_cast<double>(t - lo.t) / static_cast<double>(hi.t - lo.t);
    return lo.temperature_c + f * (hi.temperature_c - lo.temperature_c);
}

std::map<std::string, double> ReferenceSeries::daily_mean_temperature() const {
    std::map<std::string, std::pair<double, int>> acc;
    for (const auto &s : samples) {
        auto &[sum, n] = acc[format_date(s.t)];
        sum += s.temperature_c;
        ++n;
    }
    std::map<std::string, double> out;
    for (const auto &[date, v] : acc) out.emplace(date, v.first / v.second);
    return out;
}

} // namespace urbansense
