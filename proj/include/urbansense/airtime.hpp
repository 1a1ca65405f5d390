#pragma once

#include <optional>

namespace urbansense {

/// LoRaWAN MAC overhead (MHDR + FHDR without options + FPort + MIC).
inline constexpr int kLoraWanMacOverheadBytes = 13;

struct RadioParams {
    int sf = 12;
    double bw_hz = 125000.0;
    int cr = 1; ///< 1 => 4/5 ... 4 => 4/8
    int preamble_symbols = 8;
    bool explicit_header = true;
    bool crc_on = true;
    /// Unset: enabled iff sf >= 11 at 125 kHz.
    std::optional<bool> low_data_rate_optimize;

    [[nodiscard]] bool ldro() const;
    /// Throws ParamError.
    void validate() const;
};

struct TimeOnAir {
    double preamble_s = 0.0;
    double payload_s = 0.0;
    double total_s = 0.0;
};

double symbol_time_s(const RadioParams &p);

/// n = 8 + max(ceil((8PL - 4SF + 28 + 16CRC - 20H) / (4(SF - 2DE))) * (CR + 4), 0)
int payload_symbol_count(const RadioParams &p, int payload_len_bytes);

TimeOnAir time_on_air(const RadioParams &p, int payload_len_bytes);

} // namespace urbansense
