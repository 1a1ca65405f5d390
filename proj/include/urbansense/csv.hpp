#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "urbansense/measurement.hpp"

namespace urbansense {

/// Export columns, in order. The first thirteen carry the measurements;
/// the trailing ones make a re-import lossless.
inline constexpr std::string_view kExportColumns[] = {
    "dev_eui", "square_id", "received_at", "interval_start", "sitting_min", "noise_db",
    "temperature_c", "humidity_rh", "battery_pct", "lat", "lon", "accuracy_m", "fcnt",
    "header", "debug", "fix_time", "port", "rssi_dbm", "snr_db"};

/// Header row plus one row per (record, interval). CRLF line endings.
std::string export_csv(std::span<const MeasurementRecord> records, int interval_s = kDefaultIntervalS);

/// Inverse of export_csv. Throws CsvError on malformed input.
std::vector<MeasurementRecord> import_csv(std::string_view text, int interval_s = kDefaultIntervalS);

/// RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::string csv_field(std::string_view value);

} // namespace urbansense
