#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace urbansense {

/// Seconds since the Unix epoch, UTC.
using UnixSeconds = std::int64_t;

inline constexpr UnixSeconds kSecondsPerDay = 86400;

/// Simulation clock: seconds elapsed since a calendar anchor.
struct SimTime {
    std::uint64_t t_s = 0;
    UnixSeconds epoch_utc = 0;

    [[nodiscard]] UnixSeconds unix_time() const { return epoch_utc + static_cast<UnixSeconds>(t_s); }
    friend bool operator==(const SimTime &, const SimTime &) = default;
};

/// "2022-06-06T12:00:00Z"
std::string format_rfc3339(UnixSeconds t);

/// Accepts "YYYY-MM-DDTHH:MM:SS[.frac](Z|±HH:MM)"; fractional seconds are truncated.
UnixSeconds parse_rfc3339(std::string_view text);

/// "2022-06-06"
std::string format_date(UnixSeconds t);
/// Midnight UTC of a "YYYY-MM-DD" date.
UnixSeconds parse_date(std::string_view text);

/// Accepts either an RFC3339 timestamp or a bare date (midnight).
UnixSeconds parse_time_arg(std::string_view text);

/// 1 = Monday ... 7 = Sunday.
int iso_weekday(UnixSeconds t);
bool is_weekend(UnixSeconds t);

UnixSeconds day_start(UnixSeconds t);
/// Seconds since midnight UTC, in [0, 86400).
std::int64_t second_of_day(UnixSeconds t);
inline double hour_of_day(UnixSeconds t) { return static_cast<double>(second_of_day(t)) / 3600.0; }

} // namespace urbansense
