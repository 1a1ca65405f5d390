#include "urbansense/http_api.hpp"

#include <httplib.h>
#include <json.hpp>

#include "urbansense/analytics.hpp"
#include "urbansense/codec.hpp"
#include "urbansense/errors.hpp"
#include "urbansense/server.hpp"

namespace urbansense {

using nlohmann::json;

namespace {

constexpr const char *kJson = "application/json";

void send_error(httplib::Response &res, int status, std::string_view kind, std::string_view detail) {
    res.status = status;
    res.set_content(json{{"error", kind}, {"detail", detail}}.dump(), kJson);
}

void send_json(httplib::Response &res, const json &body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), kJson);
}

int status_for(const Error &e) {
    if (dynamic_cast<const NotFound *>(&e) != nullptr) return 404;
    if (dynamic_cast<const CoverageError *>(&e) != nullptr) return 422;
    return 400;
}

using Handler = std::function<void(const httplib::Request &, httplib::Response &)>;

// Maps library errors onto HTTP statuses.
Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request &req, httplib::Response &res) {
        try {
            h(req, res);
        } catch (const Error &e) {
            send_error(res, status_for(e), e.kind(), e.what());
        } catch (const json::exception &e) {
            send_error(res, 400, "BadRequest", e.what());
        } catch (const std::exception &e) {
            send_error(res, 500, "InternalError", e.what());
        }
    };
}

UnixSeconds time_param(const httplib::Request &req, const char *name, UnixSeconds def) {
    if (!req.has_param(name)) return def;
    return parse_time_arg(req.get_param_value(name));
}

double double_param(const httplib::Request &req, const char *name, double def) {
    if (!req.has_param(name)) return def;
    const std::string v = req.get_param_value(name);
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception &) {
        throw ParamError(std::string("query parameter '") + name + "' is not a number: '" + v + "'");
    }
}

std::string required_param(const httplib::Request &req, const char *name) {
    if (!req.has_param(name)) throw ParamError(std::string("missing query parameter '") + name + "'");
    return req.get_param_value(name);
}

} // namespace

void mount_api(httplib::Server &http, NetworkServer &server) {
    http.Post("/api/v1/uplinks", guarded([&server](const httplib::Request &req, httplib::Response &res) {
                  json body;
                  try {
                      body = json::parse(req.body);
                  } catch (const json::parse_error &e) {
                      return send_error(res, 400, "BadRequest", e.what());
                  }
                  UplinkEnvelope env;
                  try {
                      env = body.get<UplinkEnvelope>();
                  } catch (const Error &e) {
                      return send_error(res, 400, e.kind(), e.what());
                  } catch (const json::exception &e) {
                      return send_error(res, 400, "BadRequest", e.what());
                  }
                  IngestResult r;
                  try {
                      r = server.ingest_uplink(env);
                  } catch (const LengthError &e) {
                      return send_error(res, 422, e.kind(), e.what());
                  } catch (const UnknownLayoutError &e) {
                      return send_error(res, 422, e.kind(), e.what());
                  } catch (const RangeError &e) {
                      return send_error(res, 422, e.kind(), e.what());
                  } catch (const HexError &e) {
                      return send_error(res, 422, e.kind(), e.what());
                  }
                  const bool created = r.status == IngestStatus::Created;
                  send_json(res, {{"status", created ? "created" : "duplicate"}, {"dev_eui", env.dev_eui}, {"fcnt", env.fcnt}},
                            created ? 201 : 200);
              }));

    http.Get("/api/v1/devices", guarded([&server](const httplib::Request &, httplib::Response &res) {
                 send_json(res, json(server.devices()));
             }));

    http.Get(R"(/api/v1/devices/([^/]+)/measurements)",
             guarded([&server](const httplib::Request &req, httplib::Response &res) {
                 const auto from = time_param(req, "from", INT64_MIN);
                 const auto to = time_param(req, "to", INT64_MAX);
                 send_json(res, json(server.query_device(normalize_dev_eui(req.matches[1].str()), from, to)));
             }));

    http.Get(R"(/api/v1/squares/([^/]+)/summary)", guarded([&server](const httplib::Request &req, httplib::Response &res) {
                 const std::string date = required_param(req, "date");
                 parse_date(date);
                 send_json(res, json(server.square_summary(req.matches[1].str(), date)));
             }));

    http.Get("/api/v1/export.csv", guarded([&server](const httplib::Request &req, httplib::Response &res) {
                 const auto from = time_param(req, "from", INT64_MIN);
                 const auto to = time_param(req, "to", INT64_MAX);
                 if (from > to) throw ParamError("from is after to");
                 res.set_content(server.export_csv(from, to), "text/csv");
             }));

    http.Get("/api/v1/analytics/sun", guarded([&server](const httplib::Request &req, httplib::Response &res) {
                 const std::string eui = normalize_dev_eui(required_param(req, "dev_eui"));
                 if (!server.device(eui)) throw NotFound("unknown device " + eui);
                 const auto records = server.records();
                 const auto series = temperature_series(records, eui);
                 DaytimeWindow window{double_param(req, "start_h", 10.0), double_param(req, "end_h", 16.0)};
                 send_json(res, json(sun_exposure_classify(series, server.reference(), window,
                                                           double_param(req, "delta_c", 5.0))));
             }));

    http.Get("/api/v1/analytics/rain", guarded([](const httplib::Request &req, httplib::Response &res) {
                 const double h = double_param(req, "humidity_rh", std::nan(""));
                 if (std::isnan(h)) throw ParamError("missing query parameter 'humidity_rh'");
                 send_json(res, {{"humidity_rh", h}, {"rain", rain_flag(h)}});
             }));

    http.Get("/api/v1/analytics/scatter", guarded([&server](const httplib::Request &req, httplib::Response &res) {
                 const std::string sq = required_param(req, "square");
                 const auto records = server.records();
                 send_json(res, json(occupancy_vs_humidity(records, sq)));
             }));

    http.Get("/api/v1/analytics/profile", guarded([&server](const httplib::Request &req, httplib::Response &res) {
                 const std::string sq = required_param(req, "square");
                 const auto records = server.records();
                 send_json(res, json(hourly_profile(records, sq, double_param(req, "bin_h", 0.25), server.interval_s())));
             }));

    http.Get("/api/v1/analytics/daily", guarded([&server](const httplib::Request &, httplib::Response &res) {
                 const auto records = server.records();
                 std::vector<std::string> squares;
                 for (const auto &s : server.squares()) squares.push_back(s.id);
                 send_json(res, json(daily_sitting_vs_temperature(records, server.reference(), squares, server.interval_s())));
             }));
}

} // namespace urbansense
