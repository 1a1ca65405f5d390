#include "urbansense/airtime.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "urbansense/errors.hpp"

namespace urbansense {

namespace {

std::int64_t ceil_div(std::int64_t num, std::int64_t den) {
    std::int64_t q = num / den;
    if ((num % den != 0) && ((num > 0) == (den > 0))) ++q;
    return q;
}

} // namespace

bool RadioParams::ldro() const {
    return low_data_rate_optimize.value_or(sf >= 11 && bw_hz == 125000.0);
}

void RadioParams::validate() const {
    if (sf < 7 || sf > 12) throw ParamError("sf must be in [7, 12], got " + std::to_string(sf));
    if (cr < 1 || cr > 4) throw ParamError("cr must be in [1, 4], got " + std::to_string(cr));
    if (!(bw_hz > 0.0)) throw ParamError("bw_hz must be positive");
    if (preamble_symbols < 0) throw ParamError("preamble_symbols must be non-negative");
}

double symbol_time_s(const RadioParams &p) {
    p.validate();
    return std::ldexp(1.0, p.sf) / p.bw_hz;
}

int payload_symbol_count(const RadioParams &p, int payload_len_bytes) {
    p.validate();
    if (payload_len_bytes < 0 || payload_len_bytes > 255) throw ParamError("payload length must be in [0, 255]");
    const int h = p.explicit_header ? 0 : 1;
    const int de = p.ldro() ? 1 : 0;
    const int crc = p.crc_on ? 1 : 0;
    const std::int64_t num = 8LL * payload_len_bytes - 4LL * p.sf + 28 + 16LL * crc - 20LL * h;
    const std::int64_t den = 4LL * (p.sf - 2 * de);
    return 8 + static_cast<int>(std::max<std::int64_t>(ceil_div(num, den) * (p.cr + 4), 0));
}

TimeOnAir time_on_air(const RadioParams &p, int payload_len_bytes) {
    const double t_sym = symbol_time_s(p);
    TimeOnAir out;
    out.preamble_s = (p.preamble_symbols + 4.25) * t_sym;
    out.payload_s = payload_symbol_count(p, payload_len_bytes) * t_sym;
    out.total_s = out.preamble_s + out.payload_s;
    return out;
}

} // namespace urbansense
