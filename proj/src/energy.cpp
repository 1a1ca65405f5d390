#include "urbansense/energy.hpp"

#include <algorithm>
#include <string>

#include "urbansense/errors.hpp"

namespace urbansense {

void PowerProfile::validate() const {
    if (p_background_mw < 0 || p_gnss_mw < 0 || e_uplink_mwh < 0 || gnss_active_s_per_call < 0 ||
        uplink_active_s < 0) {
        throw ParamError("power profile values must be non-negative");
    }
    // One GNSS session and one uplink per 7200 s cycle at most.
    if (gnss_calls_per_day < 0 || gnss_calls_per_day > 12) throw ParamError("gnss_calls_per_day must be in [0, 12]");
    if (uplinks_per_day < 0 || uplinks_per_day > 12) throw ParamError("uplinks_per_day must be in [0, 12]");
    if (gnss_active_s_per_call * gnss_calls_per_day > 86400.0) throw ParamError("GNSS active time exceeds a day");
}

DailyEnergy daily_energy_mwh(const PowerProfile &p, bool gnss_enabled) {
    p.validate();
    DailyEnergy d;
    d.background = p.p_background_mw * 24.0;
    d.gnss = gnss_enabled ? p.p_gnss_mw * (p.gnss_active_s_per_call * p.gnss_calls_per_day / 3600.0) : 0.0;
    d.lora = p.e_uplink_mwh * p.uplinks_per_day;
    d.total = d.background + d.gnss + d.lora;
    return d;
}

double lifetime_days(const BatteryModel &b, double daily_total_mwh) {
    if (!(daily_total_mwh > 0.0)) throw DomainError("daily energy must be positive");
    if (!(b.usable_energy_mwh > 0.0)) throw DomainError("usable battery energy must be positive");
    return b.usable_energy_mwh / daily_total_mwh;
}

std::string_view task_name(Task t) {
    switch (t) {
    case Task::Gnss:
        return "gnss";
    case Task::LoraUplink:
        return "lora";
    }
    return "unknown";
}

DailyEnergy EnergyLedger::per_day() const {
    DailyEnergy d;
    if (span_s <= 0.0) return d;
    const double k = 86400.0 / span_s;
    d.background = background_mwh * k;
    d.gnss = gnss_mwh * k;
    d.lora = lora_mwh * k;
    d.total = d.background + d.gnss + d.lora;
    return d;
}

EnergyLedger energy_ledger(std::span<const TraceEntry> trace, const PowerProfile &p, double span_s) {
    if (span_s < 0.0) throw TraceError("negative span");
    struct Step {
        double end_s;
        double mwh;
    };
    std::vector<Step> steps;
    steps.reserve(trace.size());

    EnergyLedger ledger;
    ledger.span_s = span_s;
    ledger.background_mwh = p.p_background_mw * span_s / 3600.0;
    for (const auto &e : trace) {
        if (e.duration_s < 0.0) throw TraceError("negative duration for " + std::string(task_name(e.task)) + " at " +
                                                 std::to_string(e.start_s));
        double mwh = 0.0;
        switch (e.task) {
        case Task::Gnss:
            mwh = p.p_gnss_mw * e.duration_s / 3600.0;
            ledger.gnss_mwh += mwh;
            break;
        case Task::LoraUplink:
            mwh = p.e_uplink_mwh;
            ledger.lora_mwh += mwh;
            break;
        }
        steps.push_back({e.start_s + e.duration_s, mwh});
    }
    std::stable_sort(steps.begin(), steps.end(), [](const Step &a, const Step &b) { return a.end_s < b.end_s; });

    double tasks = 0.0;
    ledger.timeline.reserve(steps.size() + 1);
    for (const auto &s : steps) {
        tasks += s.mwh;
        // A task still running at the end of the span is booked at the span end.
        const double t = std::min(s.end_s, span_s);
        ledger.timeline.push_back({t, p.p_background_mw * t / 3600.0 + tasks});
    }
    ledger.timeline.push_back({span_s, ledger.total_mwh()});
    return ledger;
}

} // namespace urbansense
