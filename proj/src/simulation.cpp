#include "urbansense/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <sstream>
#include <thread>

#include "urbansense/channel.hpp"
#include "urbansense/random.hpp"

namespace urbansense {

namespace {

std::size_t sum(const std::vector<NodeSummary> &nodes, std::size_t NodeSummary::*field) {
    std::size_t n = 0;
    for (const auto &s : nodes) n += s.*field;
    return n;
}

} // namespace

std::size_t SimulationResult::emitted() const { return sum(nodes, &NodeSummary::emitted); }
std::size_t SimulationResult::delivered() const { return sum(nodes, &NodeSummary::delivered); }
std::size_t SimulationResult::lost() const { return sum(nodes, &NodeSummary::lost); }
std::size_t SimulationResult::dropped() const { return sum(nodes, &NodeSummary::dropped); }

SimulationResult run_scenario(const Scenario &s, NetworkServer &server, unsigned threads) {
    const World world = build_world(s);
    const auto duration_s = static_cast<std::uint64_t>(s.duration_days) * kSecondsPerDay;

    std::vector<NodeRun> runs(world.nodes.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < world.nodes.size(); i = next++) {
            const auto &nw = world.nodes[i];
            const std::uint64_t seed = hash_keys({s.seed, hash_string(nw.config.identity.dev_eui), hash_string("radio")});
            runs[i] = run_node(nw.config, *nw.trace, duration_s, seed);
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, world.nodes.size())));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    }

    SimulationResult result;
    std::vector<UplinkEnvelope> delivered;
    for (std::size_t i = 0; i < world.nodes.size(); ++i) {
        const auto &nw = world.nodes[i];
        auto &run = runs[i];
        NodeSummary ns;
        ns.dev_eui = nw.config.identity.dev_eui;
        ns.label = nw.config.identity.label;
        ns.square_id = nw.square_id;
        ns.ledger = run.ledger;
        ns.lifetime_days = lifetime_days(nw.config.battery, run.ledger.per_day().total);
        for (auto &env : run.envelopes) {
            ++ns.emitted;
            switch (channel_outcome(env, world.channel)) {
            case Delivery::Delivered:
                ++ns.delivered;
                delivered.push_back(env);
                break;
            case Delivery::Lost:
                ++ns.lost;
                break;
            case Delivery::DroppedOut:
                ++ns.dropped;
                break;
            }
            result.envelopes.push_back(std::move(env));
        }
        result.events.insert(result.events.end(), run.events.begin(), run.events.end());
        result.nodes.push_back(std::move(ns));
    }

    const auto by_time = [](const UplinkEnvelope &a, const UplinkEnvelope &b) {
        return std::tie(a.received_at, a.dev_eui, a.fcnt) < std::tie(b.received_at, b.dev_eui, b.fcnt);
    };
    std::sort(result.envelopes.begin(), result.envelopes.end(), by_time);
    std::sort(delivered.begin(), delivered.end(), by_time);
    std::stable_sort(result.events.begin(), result.events.end(),
                     [](const Event &a, const Event &b) { return a.t < b.t; });

    server.set_squares(world.squares);
    server.set_reference(world.reference);
    for (const auto &r : server.ingest_batch(delivered)) {
        switch (r.status) {
        case IngestStatus::Created:
            ++result.created;
            break;
        case IngestStatus::Duplicate:
            ++result.duplicates;
            break;
        case IngestStatus::Rejected:
            ++result.rejected;
            break;
        }
    }
    return result;
}

std::string energy_report_csv(const SimulationResult &r) {
    std::string out = "dev_eui,label,square,span_days,background_mwh,gnss_mwh,lora_mwh,total_mwh,"
                      "daily_total_mwh,lifetime_days\r\n";
    char buf[256];
    for (const auto &n : r.nodes) {
        std::snprintf(buf, sizeof buf, "%s,%s,%s,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f,%.1f\r\n", n.dev_eui.c_str(),
                      n.label.c_str(), n.square_id.c_str(), n.ledger.span_s / kSecondsPerDay, n.ledger.background_mwh,
                      n.ledger.gnss_mwh, n.ledger.lora_mwh, n.ledger.total_mwh(), n.ledger.per_day().total,
                      n.lifetime_days);
        out += buf;
    }
    return out;
}

std::string summary_text(const SimulationResult &r) {
    std::ostringstream os;
    os << "uplinks emitted " << r.emitted() << ", delivered " << r.delivered() << ", lost " << r.lost()
       << ", after dropout " << r.dropped() << "\n";
    os << "ingested " << r.created << " new, " << r.duplicates << " duplicate, " << r.rejected << " rejected\n";
    char buf[200];
    for (const auto &n : r.nodes) {
        std::snprintf(buf, sizeof buf, "  %-6s %s  square %-3s emitted %4zu delivered %4zu  %.2f mWh/day  %.1f days\n",
                      n.label.c_str(), n.dev_eui.c_str(), n.square_id.c_str(), n.emitted, n.delivered,
                      n.ledger.per_day().total, n.lifetime_days);
        os << buf;
    }
    return os.str();
}

std::string events_jsonl(const std::vector<Event> &events) {
    std::string out;
    for (const auto &e : events) {
        out += nlohmann::json(e).dump();
        out += '\n';
    }
    return out;
}

std::string envelopes_jsonl(const std::vector<UplinkEnvelope> &envelopes) {
    std::string out;
    for (const auto &e : envelopes) {
        out += nlohmann::json(e).dump();
        out += '\n';
    }
    return out;
}

} // namespace urbansense
