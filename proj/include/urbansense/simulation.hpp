#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "urbansense/energy.hpp"
#include "urbansense/envelope.hpp"
#include "urbansense/node_sim.hpp"
#include "urbansense/scenario.hpp"
#include "urbansense/server.hpp"

namespace urbansense {

struct NodeSummary {
    std::string dev_eui;
    std::string label;
    std::string square_id;
    std::size_t emitted = 0;
    std::size_t delivered = 0;
    std::size_t lost = 0;
    std::size_t dropped = 0; ///< silenced by a dropout
    EnergyLedger ledger;
    double lifetime_days = 0.0;
};

struct SimulationResult {
    std::vector<NodeSummary> nodes;
    /// Every emitted envelope ordered by (received_at, dev_eui).
    std::vector<UplinkEnvelope> envelopes;
    std::vector<Event> events;
    std::size_t created = 0;
    std::size_t duplicates = 0;
    std::size_t rejected = 0;

    [[nodiscard]] std::size_t emitted() const;
    [[nodiscard]] std::size_t delivered() const;
    [[nodiscard]] std::size_t lost() const;
    [[nodiscard]] std::size_t dropped() const;
};

/// Builds the world, simulates every node (in parallel when `threads` > 1;
/// 0 picks the hardware concurrency), passes envelopes through the channel
/// and ingests the delivered ones. Output is independent of `threads`.
SimulationResult run_scenario(const Scenario &s, NetworkServer &server, unsigned threads = 0);

/// Per-node energy breakdown as CSV.
std::string energy_report_csv(const SimulationResult &r);
/// Multi-line human-readable summary.
std::string summary_text(const SimulationResult &r);
/// One JSON object per line.
std::string events_jsonl(const std::vector<Event> &events);
std::string envelopes_jsonl(const std::vector<UplinkEnvelope> &envelopes);

} // namespace urbansense
