#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "urbansense/airtime.hpp"
#include "urbansense/analytics.hpp"
#include "urbansense/codec.hpp"
#include "urbansense/energy.hpp"
#include "urbansense/errors.hpp"
#include "urbansense/http_api.hpp"
#include "urbansense/scenario.hpp"
#include "urbansense/server.hpp"
#include "urbansense/simulation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace urbansense;

namespace {

// Explicit --store wins, then URBANSENSE_STORE, then the fallback.
std::string resolve_store(const std::string &flag, const std::string &fallback) {
    if (!flag.empty()) return flag;
    if (const char *env = std::getenv("URBANSENSE_STORE"); env != nullptr && *env != '\0') return env;
    return fallback;
}

void write_file(const fs::path &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StoreError("cannot write " + path.string());
    out << content;
}

std::string read_input(const std::string &arg) {
    if (arg != "-") return arg;
    std::stringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
}

struct SimOpts {
    std::string scenario;
    std::string out_dir = "sim-out";
    std::string store;
    unsigned threads = 0;
    bool json_out = false;
};

int cmd_sim(const SimOpts &o) {
    if (!fs::exists(o.scenario)) {
        std::cerr << "error: scenario file not found: " << o.scenario << "\n";
        return 2;
    }
    Scenario s;
    try {
        s = load_scenario(o.scenario);
    } catch (const ScenarioError &e) {
        std::cerr << "error: " << o.scenario << ": " << e.what() << "\n";
        return 2;
    }
    fs::create_directories(o.out_dir);
    const fs::path store_path = resolve_store(o.store, (fs::path(o.out_dir) / "urbansense.db").string());
    for (const char *suffix : {"", "-wal", "-shm"}) fs::remove(store_path.string() + suffix);

    NetworkServer server(MeasurementStore(store_path.string()));
    const SimulationResult r = run_scenario(s, server, o.threads);
    const fs::path out(o.out_dir);
    write_file(out / "events.jsonl", events_jsonl(r.events));
    write_file(out / "uplinks.jsonl", envelopes_jsonl(r.envelopes));
    write_file(out / "energy.csv", energy_report_csv(r));
    write_file(out / "export.csv", server.export_csv());

    if (o.json_out) {
        json nodes = json::array();
        for (const auto &n : r.nodes) {
            nodes.push_back({{"dev_eui", n.dev_eui}, {"label", n.label}, {"square", n.square_id},
                             {"emitted", n.emitted}, {"delivered", n.delivered}, {"lost", n.lost},
                             {"dropped", n.dropped}, {"daily_energy_mwh", n.ledger.per_day().total},
                             {"lifetime_days", n.lifetime_days}});
        }
        std::cout << json{{"nodes", nodes},
                          {"emitted", r.emitted()},
                          {"delivered", r.delivered()},
                          {"lost", r.lost()},
                          {"dropped", r.dropped()},
                          {"stored", server.record_count()},
                          {"store", store_path.string()}}
                         .dump(2)
                  << "\n";
    } else {
        std::cout << r.nodes.size() << " nodes, " << s.duration_days << " days\n"
                  << summary_text(r) << "stored frames " << server.record_count() << " in " << store_path.string()
                  << "\n";
    }
    return 0;
}

int cmd_serve(const std::string &store_flag, const std::string &bind) {
    const std::string store_path = resolve_store(store_flag, "urbansense.db");
    NetworkServer server(MeasurementStore{store_path});
    server.log = [](const std::string &line) { std::cerr << line << "\n"; };

    std::string host = bind;
    int port = 8080;
    if (auto colon = bind.rfind(':'); colon != std::string::npos) {
        host = bind.substr(0, colon);
        try {
            port = std::stoi(bind.substr(colon + 1));
        } catch (const std::exception &) {
            std::cerr << "error: bad bind address '" << bind << "'\n";
            return 1;
        }
    }
    httplib::Server http;
    mount_api(http, server);
    if (!http.bind_to_port(host, port)) {
        std::cerr << "error: cannot bind " << host << ":" << port << "\n";
        return 1;
    }
    std::cerr << "serving " << store_path << " on http://" << host << ":" << port << "/api/v1\n";
    http.listen_after_bind();
    return 0;
}

int cmd_codec(const std::string &mode, const std::string &input) {
    const std::string text = read_input(input);
    if (mode == "decode") {
        std::string hex = text;
        while (!hex.empty() && std::isspace(static_cast<unsigned char>(hex.back()))) hex.pop_back();
        const SensorFrame f = decode_frame_hex(hex);
        std::cout << json(f).dump(2) << "\n";
    } else {
        const SensorFrame f = json::parse(text).get<SensorFrame>();
        std::cout << encode_frame_hex(f) << "\n";
    }
    return 0;
}

int cmd_airtime(const RadioParams &p, int pl, bool json_out) {
    const TimeOnAir t = time_on_air(p, pl);
    const int n = payload_symbol_count(p, pl);
    if (json_out) {
        std::cout << json{{"sf", p.sf},
                          {"bw_hz", p.bw_hz},
                          {"cr", p.cr},
                          {"payload_bytes", pl},
                          {"payload_symbols", n},
                          {"symbol_ms", symbol_time_s(p) * 1e3},
                          {"preamble_ms", t.preamble_s * 1e3},
                          {"payload_ms", t.payload_s * 1e3},
                          {"total_ms", t.total_s * 1e3}}
                         .dump(2)
                  << "\n";
        return 0;
    }
    std::printf("SF%d BW %.0f kHz CR 4/%d, %d payload bytes\n", p.sf, p.bw_hz / 1e3, p.cr + 4, pl);
    std::printf("payload symbols  %d\n", n);
    std::printf("preamble         %.3f ms\n", t.preamble_s * 1e3);
    std::printf("payload          %.3f ms\n", t.payload_s * 1e3);
    std::printf("total            %.3f ms\n", t.total_s * 1e3);
    std::printf("note: 'payload' is the payload-only reading (SF12, 29 B gives 1245.184 ms); for the\n"
                "      on-air frame including LoRaWAN MAC overhead pass --pl %d (29 + %d B).\n",
                pl + kLoraWanMacOverheadBytes, kLoraWanMacOverheadBytes);
    return 0;
}

int cmd_energy(const PowerProfile &p, const BatteryModel &b, bool json_out) {
    p.validate();
    const DailyEnergy on = daily_energy_mwh(p, true);
    const DailyEnergy off = daily_energy_mwh(p, false);
    const double life = lifetime_days(b, on.total);
    const double life_off = lifetime_days(b, off.total);
    if (json_out) {
        std::cout << json{{"background_mwh", on.background}, {"gnss_mwh", on.gnss},   {"lora_mwh", on.lora},
                          {"total_mwh", on.total},           {"lifetime_days", life}, {"total_without_gnss_mwh", off.total},
                          {"lifetime_without_gnss_days", life_off}}
                         .dump(2)
                  << "\n";
        return 0;
    }
    std::printf("%-12s %12s %8s\n", "task", "mWh/day", "share");
    const auto row = [&](const char *name, double v) { std::printf("%-12s %12.2f %7.1f%%\n", name, v, 100.0 * v / on.total); };
    row("background", on.background);
    row("GNSS", on.gnss);
    row("LoRa", on.lora);
    row("total", on.total);
    std::printf("\nbattery %.0f mWh usable\n", b.usable_energy_mwh);
    std::printf("lifetime          %.1f days\n", life);
    std::printf("lifetime (no GNSS) %.1f days\n", life_off);
    return 0;
}

struct AnalyzeOpts {
    std::string store;
    std::string dev_eui;
    std::string square;
    double delta_c = 5.0;
    double start_h = 10.0;
    double end_h = 16.0;
    double humidity = -1.0;
    double bin_h = 0.25;
    bool json_out = false;
};

int cmd_analyze(const std::string &what, const AnalyzeOpts &o) {
    if (what == "rain") {
        const bool r = rain_flag(o.humidity);
        if (o.json_out) {
            std::cout << json{{"humidity_rh", o.humidity}, {"rain", r}}.dump() << "\n";
        } else {
            std::cout << (r ? "rain" : "dry") << "\n";
        }
        return 0;
    }
    const std::string store_path = resolve_store(o.store, "urbansense.db");
    if (!fs::exists(store_path)) {
        std::cerr << "error: store not found: " << store_path << "\n";
        return 2;
    }
    NetworkServer server(MeasurementStore{store_path});
    const auto records = server.records();
    const auto need = [](const std::string &v, const char *flag) {
        if (v.empty()) throw ParamError(std::string("missing ") + flag);
    };
    if (what == "sun") {
        need(o.dev_eui, "--dev-eui");
        const auto eui = normalize_dev_eui(o.dev_eui);
        const auto days = sun_exposure_classify(temperature_series(records, eui), server.reference(),
                                                {o.start_h, o.end_h}, o.delta_c);
        if (o.json_out) {
            std::cout << json(days).dump(2) << "\n";
        } else {
            std::cout << "date,label,mean_delta_c,samples\n";
            for (const auto &d : days) {
                std::printf("%s,%s,%.2f,%d\n", d.date.c_str(), std::string(exposure_name(d.label)).c_str(),
                            d.mean_delta_c, d.samples);
            }
        }
    } else if (what == "scatter") {
        need(o.square, "--square");
        const auto h = occupancy_vs_humidity(records, o.square);
        if (o.json_out) {
            std::cout << json(h).dump(2) << "\n";
        } else {
            std::cout << "humidity_rh,sitting_min\n";
            for (const auto &p : h.points) std::printf("%.2f,%d\n", p.humidity_rh, p.sitting_min);
        }
    } else if (what == "profile") {
        need(o.square, "--square");
        const auto p = hourly_profile(records, o.square, o.bin_h, server.interval_s());
        if (o.json_out) {
            std::cout << json(p).dump(2) << "\n";
        } else {
            std::cout << "hour,weekday_min,weekend_min\n";
            for (std::size_t i = 0; i < p.weekday.size(); ++i) {
                std::printf("%.2f,%.3f,%.3f\n", static_cast<double>(i) * p.bin_h, p.weekday[i], p.weekend[i]);
            }
        }
    } else if (what == "daily") {
        std::vector<std::string> squares;
        for (const auto &s : server.squares()) squares.push_back(s.id);
        const auto rows = daily_sitting_vs_temperature(records, server.reference(), squares, server.interval_s());
        if (o.json_out) {
            std::cout << json(rows).dump(2) << "\n";
        } else {
            std::cout << "date,square,total_sitting_min,ref_mean_temp_c\n";
            for (const auto &r : rows) {
                std::printf("%s,%s,%d,%.2f\n", r.date.c_str(), r.square_id.c_str(), r.total_sitting_min,
                            r.ref_mean_temp_c);
            }
        }
    } else {
        throw ParamError("unknown analysis '" + what + "'");
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Chair-mounted urban sensing: simulation, network server and analytics"};
    app.require_subcommand(1);
    int rc = 0;

    SimOpts sim;
    auto *sim_cmd = app.add_subcommand("sim", "Simulate a scenario into a fresh store");
    sim_cmd->add_option("scenario", sim.scenario, "Scenario JSON file")->required();
    sim_cmd->add_option("--out", sim.out_dir, "Output directory")->capture_default_str();
    sim_cmd->add_option("--store", sim.store, "Store file (default <out>/urbansense.db)");
    sim_cmd->add_option("--threads", sim.threads, "Worker threads, 0 = all cores")->capture_default_str();
    sim_cmd->add_flag("--json", sim.json_out, "Machine-readable summary");
    sim_cmd->callback([&] { rc = cmd_sim(sim); });

    std::string serve_store, bind = "127.0.0.1:8080";
    auto *serve_cmd = app.add_subcommand("serve", "Serve the HTTP API");
    serve_cmd->add_option("--store", serve_store, "Store file (default urbansense.db)");
    serve_cmd->add_option("--bind", bind, "host:port")->capture_default_str();
    serve_cmd->callback([&] { rc = cmd_serve(serve_store, bind); });

    std::string codec_mode, codec_input;
    auto *codec_cmd = app.add_subcommand("codec", "Encode frame JSON to hex or decode hex to JSON");
    codec_cmd->add_option("mode", codec_mode, "encode or decode")->required()->check(CLI::IsMember({"encode", "decode"}));
    codec_cmd->add_option("input", codec_input, "Hex string, JSON text, or - for stdin")->required();
    codec_cmd->callback([&] { rc = cmd_codec(codec_mode, codec_input); });

    RadioParams radio;
    int pl = 29;
    bool implicit_header = false, no_crc = false, airtime_json = false;
    std::string ldro = "auto";
    auto *air_cmd = app.add_subcommand("airtime", "LoRa time on air");
    air_cmd->add_option("--sf", radio.sf, "Spreading factor 7-12")->capture_default_str();
    air_cmd->add_option("--pl", pl, "Payload bytes")->capture_default_str();
    air_cmd->add_option("--bw-hz", radio.bw_hz, "Bandwidth")->capture_default_str();
    air_cmd->add_option("--cr", radio.cr, "Coding rate index, 1 = 4/5")->capture_default_str();
    air_cmd->add_option("--preamble-symbols", radio.preamble_symbols)->capture_default_str();
    air_cmd->add_option("--ldro", ldro, "on, off or auto")->check(CLI::IsMember({"on", "off", "auto"}))->capture_default_str();
    air_cmd->add_flag("--implicit-header", implicit_header);
    air_cmd->add_flag("--no-crc", no_crc);
    air_cmd->add_flag("--json", airtime_json);
    air_cmd->callback([&] {
        radio.explicit_header = !implicit_header;
        radio.crc_on = !no_crc;
        if (ldro != "auto") radio.low_data_rate_optimize = ldro == "on";
        rc = cmd_airtime(radio, pl, airtime_json);
    });

    PowerProfile power;
    BatteryModel battery;
    bool energy_json = false;
    auto *energy_cmd = app.add_subcommand("energy", "Daily energy breakdown and battery lifetime");
    energy_cmd->add_option("--p-background-mw", power.p_background_mw)->capture_default_str();
    energy_cmd->add_option("--p-gnss-mw", power.p_gnss_mw)->capture_default_str();
    energy_cmd->add_option("--e-uplink-mwh", power.e_uplink_mwh)->capture_default_str();
    energy_cmd->add_option("--gnss-active-s-per-call", power.gnss_active_s_per_call)->capture_default_str();
    energy_cmd->add_option("--gnss-calls-per-day", power.gnss_calls_per_day)->capture_default_str();
    energy_cmd->add_option("--uplinks-per-day", power.uplinks_per_day)->capture_default_str();
    energy_cmd->add_option("--usable-energy-mwh", battery.usable_energy_mwh)->capture_default_str();
    energy_cmd->add_flag("--json", energy_json);
    energy_cmd->callback([&] { rc = cmd_energy(power, battery, energy_json); });

    AnalyzeOpts an;
    std::string analysis;
    auto *an_cmd = app.add_subcommand("analyze", "Analytics over a store (CSV by default)");
    an_cmd->add_option("analysis", analysis, "sun, rain, scatter, profile or daily")
        ->required()
        ->check(CLI::IsMember({"sun", "rain", "scatter", "profile", "daily"}));
    an_cmd->add_option("--store", an.store, "Store file (default urbansense.db)");
    an_cmd->add_option("--dev-eui", an.dev_eui, "Device for sun");
    an_cmd->add_option("--square", an.square, "Square for scatter and profile");
    an_cmd->add_option("--delta-c", an.delta_c)->capture_default_str();
    an_cmd->add_option("--start-h", an.start_h)->capture_default_str();
    an_cmd->add_option("--end-h", an.end_h)->capture_default_str();
    an_cmd->add_option("--humidity-rh", an.humidity, "Humidity for rain");
    an_cmd->add_option("--bin-h", an.bin_h)->capture_default_str();
    an_cmd->add_flag("--json", an.json_out);
    an_cmd->callback([&] {
        if (analysis == "rain" && an.humidity < 0 && !an_cmd->count("--humidity-rh")) {
            throw CLI::ValidationError("--humidity-rh", "required for rain");
        }
        rc = cmd_analyze(analysis, an);
    });

    std::string check_path;
    auto *sc_cmd = app.add_subcommand("scenario", "Print the default scenario or check a scenario file");
    sc_cmd->add_option("--check", check_path, "Validate this file instead");
    sc_cmd->callback([&] {
        if (check_path.empty()) {
            std::cout << scenario_to_json(default_scenario()).dump(2) << "\n";
            return;
        }
        if (!fs::exists(check_path)) {
            std::cerr << "error: scenario file not found: " << check_path << "\n";
            rc = 2;
            return;
        }
        try {
            const auto s = load_scenario(check_path);
            std::cout << "ok: " << s.nodes.size() << " nodes, " << s.squares.size() << " squares, "
                      << s.duration_days << " days\n";
        } catch (const ScenarioError &e) {
            std::cerr << "error: " << check_path << ": " << e.what() << "\n";
            rc = 2;
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e);
    } catch (const Error &e) {
        std::cerr << e.kind() << ": " << e.what() << "\n";
        return 1;
    } catch (const json::exception &e) {
        std::cerr << "invalid JSON: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
