#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace urbansense {

/// Per-task power draws. Defaults reproduce the measured node.
struct PowerProfile {
    double p_background_mw = 0.39;     ///< sitting + noise, always on
    double p_gnss_mw = 22.9;           ///< while the receiver is powered
    double e_uplink_mwh = 1.91 / 12.0; ///< per transmission event
    double gnss_active_s_per_call = 300.0;
    int gnss_calls_per_day = 12;
    int uplinks_per_day = 12;
    /// Radio-on time per uplink; only used to lay out energy traces.
    double uplink_active_s = 10.2;

    /// Throws ParamError.
    void validate() const;
};

struct BatteryModel {
    double usable_energy_mwh = 2053.0;
    double nominal_capacity_mah = 2000.0;
    double nominal_voltage_v = 3.0;
};

struct DailyEnergy {
    double background = 0.0;
    double gnss = 0.0;
    double lora = 0.0;
    double total = 0.0;
};

DailyEnergy daily_energy_mwh(const PowerProfile &p, bool gnss_enabled = true);

/// Throws DomainError for non-positive daily energy.
double lifetime_days(const BatteryModel &b, double daily_total_mwh);

enum class Task { Gnss, LoraUplink };

std::string_view task_name(Task t);

struct TraceEntry {
    Task task;
    double start_s;
    double duration_s;
    friend bool operator==(const TraceEntry &, const TraceEntry &) = default;
};

struct LedgerPoint {
    double t_s;
    double cumulative_mwh;
};

struct EnergyLedger {
    double span_s = 0.0;
    double background_mwh = 0.0;
    double gnss_mwh = 0.0;
    double lora_mwh = 0.0;
    /// Cumulative energy at every task end and at the end of the span.
    std::vector<LedgerPoint> timeline;

    [[nodiscard]] double total_mwh() const { return background_mwh + gnss_mwh + lora_mwh; }
    /// Scales the ledger to a 24 h average.
    [[nodiscard]] DailyEnergy per_day() const;
};

/// Integrates task energy over a trace, with background power applied for
/// the whole [0, span_s]. GNSS entries draw p_gnss_mw for their duration;
/// each uplink entry costs e_uplink_mwh. Throws TraceError on negative
/// durations or span.
EnergyLedger energy_ledger(std::span<const TraceEntry> trace, const PowerProfile &p, double span_s);

} // namespace urbansense
