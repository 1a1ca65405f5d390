#include "urbansense/time.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "urbansense/errors.hpp"

namespace urbansense {

namespace {

using std::chrono::days;
using std::chrono::sys_days;
using std::chrono::year_month_day;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

int read_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
    if (pos + len > text.size()) throw TimeFormatError("truncated timestamp: " + std::string(whole));
    int value = 0;
    auto first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, value);
    if (ec != std::errc{} || ptr != first + len) {
        throw TimeFormatError("malformed timestamp: " + std::string(whole));
    }
    return value;
}

void expect(std::string_view text, std::size_t pos, char c, std::string_view whole) {
    if (pos >= text.size() || text[pos] != c) {
        throw TimeFormatError("malformed timestamp: " + std::string(whole));
    }
}

UnixSeconds civil_to_unix(int y, int m, int d, std::string_view whole) {
    const year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                             std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw TimeFormatError("invalid date: " + std::string(whole));
    return static_cast<UnixSeconds>(sys_days{ymd}.time_since_epoch().count()) * kSecondsPerDay;
}

} // namespace

UnixSeconds day_start(UnixSeconds t) { return floor_div(t, kSecondsPerDay) * kSecondsPerDay; }

std::int64_t second_of_day(UnixSeconds t) { return t - day_start(t); }

int iso_weekday(UnixSeconds t) {
    const std::chrono::weekday wd{sys_days{days{floor_div(t, kSecondsPerDay)}}};
    return static_cast<int>(wd.iso_encoding());
}

bool is_weekend(UnixSeconds t) { return iso_weekday(t) >= 6; }

std::string format_date(UnixSeconds t) {
    const year_month_day ymd{sys_days{days{floor_div(t, kSecondsPerDay)}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string format_rfc3339(UnixSeconds t) {
    const auto sod = second_of_day(t);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", format_date(t).c_str(), static_cast<int>(sod / 3600),
                  static_cast<int>(sod / 60 % 60), static_cast<int>(sod % 60));
    return buf;
}

UnixSeconds parse_date(std::string_view text) {
    if (text.size() != 10) throw TimeFormatError("expected YYYY-MM-DD: " + std::string(text));
    const int y = read_int(text, 0, 4, text);
    expect(text, 4, '-', text);
    const int m = read_int(text, 5, 2, text);
    expect(text, 7, '-', text);
    const int d = read_int(text, 8, 2, text);
    return civil_to_unix(y, m, d, text);
}

UnixSeconds parse_rfc3339(std::string_view text) {
    if (text.size() < 20) throw TimeFormatError("expected RFC3339 timestamp: " + std::string(text));
    const UnixSeconds date = parse_date(text.substr(0, 10));
    if (text[10] != 'T' && text[10] != 't' && text[10] != ' ') {
        throw TimeFormatError("malformed timestamp: " + std::string(text));
    }
    const int hh = read_int(text, 11, 2, text);
    expect(text, 13, ':', text);
    const int mm = read_int(text, 14, 2, text);
    expect(text, 16, ':', text);
    const int ss = read_int(text, 17, 2, text);
    if (hh > 23 || mm > 59 || ss > 60) throw TimeFormatError("time out of range: " + std::string(text));

    std::size_t pos = 19;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        const std::size_t digits = pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
        if (pos == digits) throw TimeFormatError("malformed fraction: " + std::string(text));
    }
    if (pos >= text.size()) throw TimeFormatError("missing UTC offset: " + std::string(text));

    std::int64_t offset = 0;
    if (text[pos] == 'Z' || text[pos] == 'z') {
        ++pos;
    } else if (text[pos] == '+' || text[pos] == '-') {
        const int sign = text[pos] == '+' ? 1 : -1;
        const int oh = read_int(text, pos + 1, 2, text);
        expect(text, pos + 3, ':', text);
        const int om = read_int(text, pos + 4, 2, text);
        offset = sign * (oh * 3600 + om * 60);
        pos += 6;
    } else {
        throw TimeFormatError("malformed UTC offset: " + std::string(text));
    }
    if (pos != text.size()) throw TimeFormatError("trailing characters: " + std::string(text));
    return date + hh * 3600 + mm * 60 + ss - offset;
}

UnixSeconds parse_time_arg(std::string_view text) {
    return text.size() == 10 ? parse_date(text) : parse_rfc3339(text);
}

} // namespace urbansense
