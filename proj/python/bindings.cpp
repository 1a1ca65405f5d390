#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "urbansense/airtime.hpp"
#include "urbansense/analytics.hpp"
#include "urbansense/codec.hpp"
#include "urbansense/energy.hpp"
#include "urbansense/errors.hpp"
#include "urbansense/geo.hpp"
#include "urbansense/scenario.hpp"
#include "urbansense/server.hpp"
#include "urbansense/simulation.hpp"

namespace py = pybind11;
using namespace urbansense;
using nlohmann::json;

namespace {

// Structured values cross the boundary as JSON text; the Python package decodes them.
class PyServer {
public:
    explicit PyServer(const std::string &path) : server_(MeasurementStore{path}) {}

    std::string ingest(const std::string &envelope_json) {
        const auto env = json::parse(envelope_json).get<UplinkEnvelope>();
        return server_.ingest_uplink(env).status == IngestStatus::Created ? "created" : "duplicate";
    }
    std::uint64_t record_count() const { return server_.record_count(); }
    std::string export_csv() const { return server_.export_csv(); }
    std::string devices() const { return json(server_.devices()).dump(); }
    std::string records() const { return json(server_.records()).dump(); }
    std::string simulate(const std::string &scenario_json, unsigned threads) {
        const auto r = run_scenario(parse_scenario(scenario_json), server_, threads);
        json nodes = json::array();
        for (const auto &n : r.nodes) {
            nodes.push_back({{"dev_eui", n.dev_eui}, {"label", n.label}, {"square", n.square_id},
                             {"emitted", n.emitted}, {"delivered", n.delivered}, {"lost", n.lost},
                             {"dropped", n.dropped}, {"daily_energy_mwh", n.ledger.per_day().total}});
        }
        return json{{"emitted", r.emitted()}, {"delivered", r.delivered()}, {"lost", r.lost()},
                    {"dropped", r.dropped()}, {"created", r.created}, {"nodes", nodes}}
            .dump();
    }

private:
    NetworkServer server_;
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "urbansense native core";

    static py::exception<Error> base(m, "UrbanSenseError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error &e) {
            py::set_error(base, (std::string(e.kind()) + ": " + e.what()).c_str());
        } catch (const json::exception &e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def("encode_frame_hex", [](const std::string &frame_json) {
        return encode_frame_hex(json::parse(frame_json).get<SensorFrame>());
    });
    m.def("decode_frame_hex", [](const std::string &hex) { return json(decode_frame_hex(hex)).dump(); });

    m.def(
        "time_on_air",
        [](int sf, int payload_len, double bw_hz, int cr, int preamble, bool explicit_header, bool crc,
           std::optional<bool> ldro) {
            RadioParams p{sf, bw_hz, cr, preamble, explicit_header, crc, ldro};
            const auto t = time_on_air(p, payload_len);
            return py::make_tuple(t.preamble_s, t.payload_s, t.total_s, payload_symbol_count(p, payload_len));
        },
        py::arg("sf"), py::arg("payload_len"), py::arg("bw_hz") = 125000.0, py::arg("cr") = 1,
        py::arg("preamble_symbols") = 8, py::arg("explicit_header") = true, py::arg("crc") = true,
        py::arg("ldro") = py::none());

    m.def(
        "daily_energy",
        [](bool gnss, double p_background_mw, double p_gnss_mw, double e_uplink_mwh, double gnss_s, int gnss_calls,
           int uplinks) {
            PowerProfile p;
            p.p_background_mw = p_background_mw;
            p.p_gnss_mw = p_gnss_mw;
            p.e_uplink_mwh = e_uplink_mwh;
            p.gnss_active_s_per_call = gnss_s;
            p.gnss_calls_per_day = gnss_calls;
            p.uplinks_per_day = uplinks;
            p.validate();
            const auto d = daily_energy_mwh(p, gnss);
            return py::dict(py::arg("background") = d.background, py::arg("gnss") = d.gnss,
                            py::arg("lora") = d.lora, py::arg("total") = d.total);
        },
        py::arg("gnss_enabled") = true, py::arg("p_background_mw") = PowerProfile{}.p_background_mw,
        py::arg("p_gnss_mw") = PowerProfile{}.p_gnss_mw, py::arg("e_uplink_mwh") = PowerProfile{}.e_uplink_mwh,
        py::arg("gnss_active_s_per_call") = PowerProfile{}.gnss_active_s_per_call,
        py::arg("gnss_calls_per_day") = PowerProfile{}.gnss_calls_per_day,
        py::arg("uplinks_per_day") = PowerProfile{}.uplinks_per_day);
    m.def(
        "lifetime_days",
        [](double daily_mwh, double usable_mwh) { return lifetime_days(BatteryModel{usable_mwh}, daily_mwh); },
        py::arg("daily_mwh"), py::arg("usable_energy_mwh") = BatteryModel{}.usable_energy_mwh);

    m.def(
        "point_in_square",
        [](double lat, double lon, const std::vector<std::pair<double, double>> &boundary) {
            SquareDefinition sq{"sq", "sq", {}};
            for (auto [a, b] : boundary) sq.boundary.push_back(GeoPosition::from_degrees(a, b));
            return point_in_square(GeoPosition::from_degrees(lat, lon, 0), sq);
        },
        py::arg("lat"), py::arg("lon"), py::arg("boundary"));

    m.def("rain_flag", &rain_flag, py::arg("humidity_rh"));
    m.def("default_scenario_json", [] { return scenario_to_json(default_scenario()).dump(2); });
    m.def("check_scenario", [](const std::string &text) { (void)parse_scenario(text); });

    py::class_<PyServer>(m, "Server")
        .def(py::init<const std::string &>(), py::arg("path") = ":memory:")
        .def("ingest", &PyServer::ingest, py::arg("envelope_json"))
        .def("record_count", &PyServer::record_count)
        .def("export_csv", &PyServer::export_csv)
        .def("devices", &PyServer::devices)
        .def("records", &PyServer::records)
        .def("simulate", &PyServer::simulate, py::arg("scenario_json"), py::arg("threads") = 0,
             py::call_guard<py::gil_scoped_release>());
}
