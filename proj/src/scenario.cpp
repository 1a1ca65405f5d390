#include "urbansense/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "urbansense/errors.hpp"
#include "urbansense/random.hpp"

namespace urbansense {

using nlohmann::json;

// ---------------------------------------------------------------------------
// JSON reading with path diagnostics

namespace {

std::string join(const std::string &path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index(const std::string &path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void check_object(const json &j, const std::string &path, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) throw ScenarioError(path, "expected an object");
    for (const auto &item : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw ScenarioError(join(path, item.key()), "unknown key");
        }
    }
}

const json *find(const json &j, std::string_view key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double num(const json &j, const std::string &path, std::string_view key, double def) {
    const json *v = find(j, key);
    if (v == nullptr) return def;
    if (!v->is_number()) throw ScenarioError(join(path, key), "expected a number");
    return v->get<double>();
}

double req_num(const json &j, const std::string &path, std::string_view key) {
    if (find(j, key) == nullptr) throw ScenarioError(join(path, key), "missing required key");
    return num(j, path, key, 0.0);
}

std::int64_t integer(const json &j, const std::string &path, std::string_view key, std::int64_t def) {
    const json *v = find(j, key);
    if (v == nullptr) return def;
    if (!v->is_number_integer()) throw ScenarioError(join(path, key), "expected an integer");
    return v->get<std::int64_t>();
}

std::string str(const json &j, const std::string &path, std::string_view key, std::optional<std::string> def = {}) {
    const json *v = find(j, key);
    if (v == nullptr) {
        if (def) return *def;
        throw ScenarioError(join(path, key), "missing required key");
    }
    if (!v->is_string()) throw ScenarioError(join(path, key), "expected a string");
    return v->get<std::string>();
}

bool boolean(const json &j, const std::string &path, std::string_view key, bool def) {
    const json *v = find(j, key);
    if (v == nullptr) return def;
    if (!v->is_boolean()) throw ScenarioError(join(path, key), "expected true or false");
    return v->get<bool>();
}

const json &array(const json &j, const std::string &path, std::string_view key, bool required) {
    static const json kEmpty = json::array();
    const json *v = find(j, key);
    if (v == nullptr) {
        if (required) throw ScenarioError(join(path, key), "missing required key");
        return kEmpty;
    }
    if (!v->is_array()) throw ScenarioError(join(path, key), "expected an array");
    return *v;
}

WeatherConfig read_weather(const json &j, const std::string &path) {
    check_object(j, path,
                 {"temp_min_c", "temp_max_c", "day_jitter_c", "cold_spells", "rain_events", "sun_offset_c",
                  "shade_offset_c", "dry_humidity_rh", "humidity_swing_rh", "overcast_lead_h", "reference_step_s"});
    WeatherConfig w;
    w.temp_min_c = num(j, path, "temp_min_c", w.temp_min_c);
    w.temp_max_c = num(j, path, "temp_max_c", w.temp_max_c);
    w.day_jitter_c = num(j, path, "day_jitter_c", w.day_jitter_c);
    w.sun_offset_c = num(j, path, "sun_offset_c", w.sun_offset_c);
    w.shade_offset_c = num(j, path, "shade_offset_c", w.shade_offset_c);
    w.dry_humidity_rh = num(j, path, "dry_humidity_rh", w.dry_humidity_rh);
    w.humidity_swing_rh = num(j, path, "humidity_swing_rh", w.humidity_swing_rh);
    w.overcast_lead_h = num(j, path, "overcast_lead_h", w.overcast_lead_h);
    w.reference_step_s = static_cast<int>(integer(j, path, "reference_step_s", w.reference_step_s));
    const std::string cs_path = join(path, "cold_spells");
    const auto &cs = array(j, path, "cold_spells", false);
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const std::string p = index(cs_path, i);
        check_object(cs[i], p, {"start_day", "days", "temp_min_c", "temp_max_c"});
        w.cold_spells.push_back({static_cast<int>(integer(cs[i], p, "start_day", 0)),
                                 static_cast<int>(integer(cs[i], p, "days", 1)), req_num(cs[i], p, "temp_min_c"),
                                 req_num(cs[i], p, "temp_max_c")});
    }
    const std::string re_path = join(path, "rain_events");
    const auto &re = array(j, path, "rain_events", false);
    for (std::size_t i = 0; i < re.size(); ++i) {
        const std::string p = index(re_path, i);
        check_object(re[i], p, {"day", "start_h", "duration_h"});
        w.rain_events.push_back({static_cast<int>(integer(re[i], p, "day", 0)), req_num(re[i], p, "start_h"),
                                 req_num(re[i], p, "duration_h")});
    }
    return w;
}

VisitorProfile read_visitors(const json &j, const std::string &path) {
    check_object(j, path,
                 {"daytime_per_h", "lunch_peak_per_h", "lunch_center_h", "lunch_width_h", "evening_per_h",
                  "evening_start_h", "evening_end_h", "weekend_per_h", "weekend_evening_per_h", "mean_duration_min",
                  "rain_aversion", "rain_max_duration_min", "cold_cutoff_c", "cold_factor"});
    VisitorProfile v;
    v.daytime_per_h = num(j, path, "daytime_per_h", v.daytime_per_h);
    v.lunch_peak_per_h = num(j, path, "lunch_peak_per_h", v.lunch_peak_per_h);
    v.lunch_center_h = num(j, path, "lunch_center_h", v.lunch_center_h);
    v.lunch_width_h = num(j, path, "lunch_width_h", v.lunch_width_h);
    v.evening_per_h = num(j, path, "evening_per_h", v.evening_per_h);
    v.evening_start_h = num(j, path, "evening_start_h", v.evening_start_h);
    v.evening_end_h = num(j, path, "evening_end_h", v.evening_end_h);
    v.weekend_per_h = num(j, path, "weekend_per_h", v.weekend_per_h);
    v.weekend_evening_per_h = num(j, path, "weekend_evening_per_h", v.weekend_evening_per_h);
    v.mean_duration_min = num(j, path, "mean_duration_min", v.mean_duration_min);
    v.rain_aversion = num(j, path, "rain_aversion", v.rain_aversion);
    v.rain_max_duration_min = num(j, path, "rain_max_duration_min", v.rain_max_duration_min);
    v.cold_cutoff_c = num(j, path, "cold_cutoff_c", v.cold_cutoff_c);
    v.cold_factor = num(j, path, "cold_factor", v.cold_factor);
    return v;
}

GnssConfig read_gnss(const json &j, const std::string &path) {
    check_object(j, path, {"fix_min_s", "fix_max_s", "no_reception_probability", "accuracy_min_dm", "accuracy_max_dm"});
    GnssConfig g;
    g.fix_min_s = num(j, path, "fix_min_s", g.fix_min_s);
    g.fix_max_s = num(j, path, "fix_max_s", g.fix_max_s);
    g.no_reception_probability = num(j, path, "no_reception_probability", g.no_reception_probability);
    g.accuracy_min_dm = static_cast<int>(integer(j, path, "accuracy_min_dm", g.accuracy_min_dm));
    g.accuracy_max_dm = static_cast<int>(integer(j, path, "accuracy_max_dm", g.accuracy_max_dm));
    return g;
}

int line_of(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

} // namespace

Scenario scenario_from_json(const json &j) {
    check_object(j, "", {"seed", "duration_days", "epoch_utc", "squares", "nodes", "weather", "visitors", "gnss", "channel"});
    Scenario s;
    if (const json *seed = find(j, "seed")) {
        if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<std::int64_t>() >= 0)) {
            throw ScenarioError("seed", "expected a non-negative integer");
        }
        s.seed = seed->get<std::uint64_t>();
    }
    s.duration_days = static_cast<int>(integer(j, "", "duration_days", s.duration_days));
    try {
        s.epoch_utc = parse_rfc3339(str(j, "", "epoch_utc", std::string("2022-06-06T00:00:00Z")));
    } catch (const TimeFormatError &e) {
        throw ScenarioError("epoch_utc", e.what());
    }

    const auto &squares = array(j, "", "squares", true);
    for (std::size_t i = 0; i < squares.size(); ++i) {
        const std::string p = index("squares", i);
        check_object(squares[i], p, {"id", "name", "boundary"});
        SquareDefinition sq;
        sq.id = str(squares[i], p, "id");
        sq.name = str(squares[i], p, "name", sq.id);
        const auto &b = array(squares[i], p, "boundary", true);
        for (std::size_t k = 0; k < b.size(); ++k) {
            const std::string vp = index(join(p, "boundary"), k);
            if (!b[k].is_array() || b[k].size() != 2 || !b[k][0].is_number() || !b[k][1].is_number()) {
                throw ScenarioError(vp, "expected [lat, lon]");
            }
            sq.boundary.push_back(GeoPosition::from_degrees(b[k][0].get<double>(), b[k][1].get<double>(), 0));
        }
        s.squares.push_back(std::move(sq));
    }

    const auto &nodes = array(j, "", "nodes", true);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string p = index("nodes", i);
        check_object(nodes[i], p, {"dev_eui", "label", "square", "lat", "lon", "sun_exposed", "dropout_day"});
        NodePlacement n;
        try {
            n.identity.dev_eui = normalize_dev_eui(str(nodes[i], p, "dev_eui"));
        } catch (const ParamError &e) {
            throw ScenarioError(join(p, "dev_eui"), e.what());
        }
        n.identity.label = str(nodes[i], p, "label", n.identity.dev_eui);
        n.square_id = str(nodes[i], p, "square");
        n.lat = req_num(nodes[i], p, "lat");
        n.lon = req_num(nodes[i], p, "lon");
        n.sun_exposed = boolean(nodes[i], p, "sun_exposed", false);
        if (const json *d = find(nodes[i], "dropout_day"); d != nullptr && !d->is_null()) {
            n.dropout_day = num(nodes[i], p, "dropout_day", 0.0);
        }
        s.nodes.push_back(std::move(n));
    }

    if (const json *w = find(j, "weather")) s.weather = read_weather(*w, "weather");
    if (const json *v = find(j, "visitors")) {
        if (!v->is_object()) throw ScenarioError("visitors", "expected an object keyed by square id");
        for (const auto &item : v->items()) {
            s.visitors[item.key()] = read_visitors(item.value(), join("visitors", item.key()));
        }
    }
    if (const json *g = find(j, "gnss")) s.gnss = read_gnss(*g, "gnss");
    if (const json *c = find(j, "channel")) {
        check_object(*c, "channel", {"loss_probability"});
        s.loss_probability = num(*c, "channel", "loss_probability", 0.0);
    }
    validate_scenario(s);
    return s;
}

Scenario parse_scenario(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ScenarioError("", std::string("invalid JSON: ") + e.what(), line_of(text, e.byte));
    }
    try {
        return scenario_from_json(j);
    } catch (const ScenarioError &e) {
        // Best effort: point at the first occurrence of the offending key.
        const auto &path = e.path();
        const auto dot = path.find_last_of(".");
        std::string key = dot == std::string::npos ? path : path.substr(dot + 1);
        if (auto br = key.find('['); br != std::string::npos) key.resize(br);
        int line = 0;
        if (!key.empty()) {
            const auto pos = text.find("\"" + key + "\"");
            if (pos != std::string_view::npos) line = line_of(text, pos);
        }
        if (line == 0 || e.line() != 0) throw;
        std::string what = e.what();
        if (!path.empty() && what.rfind(path + ": ", 0) == 0) what = what.substr(path.size() + 2);
        throw ScenarioError(path, what, line);
    }
}

Scenario load_scenario(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("", "cannot read scenario file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

void validate_scenario(const Scenario &s) {
    if (s.duration_days < 1 || s.duration_days > 3650) throw ScenarioError("duration_days", "must be in [1, 3650]");
    if (second_of_day(s.epoch_utc) != 0) throw ScenarioError("epoch_utc", "must be midnight UTC");
    if (s.squares.empty()) throw ScenarioError("squares", "at least one square is required");
    std::set<std::string> square_ids;
    for (std::size_t i = 0; i < s.squares.size(); ++i) {
        const auto &sq = s.squares[i];
        if (sq.id.empty()) throw ScenarioError(index("squares", i) + ".id", "must not be empty");
        if (!square_ids.insert(sq.id).second) throw ScenarioError(index("squares", i) + ".id", "duplicate id");
        try {
            validate_square(sq);
        } catch (const GeometryError &e) {
            throw ScenarioError(index("squares", i) + ".boundary", e.what());
        }
    }
    if (s.nodes.empty()) throw ScenarioError("nodes", "at least one node is required");
    std::set<std::string> euis;
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
        const auto &n = s.nodes[i];
        const std::string p = index("nodes", i);
        if (!euis.insert(n.identity.dev_eui).second) throw ScenarioError(p + ".dev_eui", "duplicate dev_eui");
        auto sq = std::find_if(s.squares.begin(), s.squares.end(), [&](const auto &q) { return q.id == n.square_id; });
        if (sq == s.squares.end()) throw ScenarioError(p + ".square", "unknown square '" + n.square_id + "'");
        const auto pos = GeoPosition::from_degrees(n.lat, n.lon, 0);
        if (!pos.valid()) throw ScenarioError(p + ".lat", "coordinates out of range");
        if (!point_in_polygon(pos, sq->boundary)) {
            throw ScenarioError(p + ".lat", "placement lies outside square '" + n.square_id + "'");
        }
        if (n.dropout_day && (*n.dropout_day < 0.0 || *n.dropout_day > s.duration_days)) {
            throw ScenarioError(p + ".dropout_day", "must be within [0, duration_days]");
        }
    }
    const auto &w = s.weather;
    if (!(w.temp_min_c < w.temp_max_c)) throw ScenarioError("weather.temp_min_c", "must be below temp_max_c");
    if (w.day_jitter_c < 0) throw ScenarioError("weather.day_jitter_c", "must be non-negative");
    if (w.sun_offset_c < 0 || w.shade_offset_c < 0) throw ScenarioError("weather.sun_offset_c", "offsets must be non-negative");
    if (w.dry_humidity_rh - w.humidity_swing_rh < 0 || w.dry_humidity_rh + w.humidity_swing_rh >= 80.0) {
        throw ScenarioError("weather.dry_humidity_rh", "dry humidity must stay within [0, 80)");
    }
    if (w.overcast_lead_h < 0) throw ScenarioError("weather.overcast_lead_h", "must be non-negative");
    if (w.reference_step_s <= 0 || kSecondsPerDay % w.reference_step_s != 0) {
        throw ScenarioError("weather.reference_step_s", "must divide one day");
    }
    for (std::size_t i = 0; i < w.cold_spells.size(); ++i) {
        const auto &c = w.cold_spells[i];
        const std::string p = index("weather.cold_spells", i);
        if (c.start_day < 0 || c.days < 1 || c.start_day + c.days > s.duration_days + 1) {
            throw ScenarioError(p + ".start_day", "cold spell outside the scenario");
        }
        if (!(c.temp_min_c < c.temp_max_c)) throw ScenarioError(p + ".temp_min_c", "must be below temp_max_c");
    }
    for (std::size_t i = 0; i < w.rain_events.size(); ++i) {
        const auto &r = w.rain_events[i];
        const std::string p = index("weather.rain_events", i);
        if (r.day < 0 || r.day >= s.duration_days) throw ScenarioError(p + ".day", "outside the scenario");
        if (r.start_h < 0 || r.start_h >= 24) throw ScenarioError(p + ".start_h", "must be in [0, 24)");
        if (!(r.duration_h > 0)) throw ScenarioError(p + ".duration_h", "must be positive");
    }
    for (const auto &[id, v] : s.visitors) {
        const std::string p = join("visitors", id);
        if (!square_ids.contains(id)) throw ScenarioError(p, "unknown square");
        for (double x : {v.daytime_per_h, v.lunch_peak_per_h, v.evening_per_h, v.weekend_per_h, v.weekend_evening_per_h}) {
            if (x < 0) throw ScenarioError(p, "intensities must be non-negative");
        }
        if (!(v.lunch_width_h > 0)) throw ScenarioError(p + ".lunch_width_h", "must be positive");
        if (!(v.mean_duration_min > 0)) throw ScenarioError(p + ".mean_duration_min", "must be positive");
        if (v.rain_aversion < 0 || v.rain_aversion > 1) throw ScenarioError(p + ".rain_aversion", "must be in [0, 1]");
        if (v.cold_factor < 0 || v.cold_factor > 1) throw ScenarioError(p + ".cold_factor", "must be in [0, 1]");
        if (!(v.rain_max_duration_min >= 1)) throw ScenarioError(p + ".rain_max_duration_min", "must be at least 1");
    }
    const auto &g = s.gnss;
    if (g.fix_min_s < 0 || g.fix_max_s < g.fix_min_s) throw ScenarioError("gnss.fix_min_s", "need 0 <= fix_min_s <= fix_max_s");
    if (g.no_reception_probability < 0 || g.no_reception_probability > 1) {
        throw ScenarioError("gnss.no_reception_probability", "must be in [0, 1]");
    }
    if (g.accuracy_min_dm < 0 || g.accuracy_max_dm < g.accuracy_min_dm || g.accuracy_max_dm >= GeoPosition::kNoFix) {
        throw ScenarioError("gnss.accuracy_min_dm", "need 0 <= accuracy_min_dm <= accuracy_max_dm < 65535");
    }
    if (!(s.loss_probability >= 0 && s.loss_probability < 1)) {
        throw ScenarioError("channel.loss_probability", "must be in [0, 1)");
    }
}

json scenario_to_json(const Scenario &s) {
    json squares = json::array();
    for (const auto &sq : s.squares) {
        json b = json::array();
        for (const auto &v : sq.boundary) b.push_back({v.latitude_deg(), v.longitude_deg()});
        squares.push_back({{"id", sq.id}, {"name", sq.name}, {"boundary", b}});
    }
    json nodes = json::array();
    for (const auto &n : s.nodes) {
        json o = {{"dev_eui", n.identity.dev_eui}, {"label", n.identity.label}, {"square", n.square_id},
                  {"lat", n.lat}, {"lon", n.lon}, {"sun_exposed", n.sun_exposed}};
        if (n.dropout_day) o["dropout_day"] = *n.dropout_day;
        nodes.push_back(o);
    }
    const auto &w = s.weather;
    json cold = json::array();
    for (const auto &c : w.cold_spells) {
        cold.push_back({{"start_day", c.start_day}, {"days", c.days}, {"temp_min_c", c.temp_min_c}, {"temp_max_c", c.temp_max_c}});
    }
    json rain = json::array();
    for (const auto &r : w.rain_events) rain.push_back({{"day", r.day}, {"start_h", r.start_h}, {"duration_h", r.duration_h}});
    json visitors = json::object();
    for (const auto &[id, v] : s.visitors) {
        visitors[id] = {{"daytime_per_h", v.daytime_per_h},
                        {"lunch_peak_per_h", v.lunch_peak_per_h},
                        {"lunch_center_h", v.lunch_center_h},
                        {"lunch_width_h", v.lunch_width_h},
                        {"evening_per_h", v.evening_per_h},
                        {"evening_start_h", v.evening_start_h},
                        {"evening_end_h", v.evening_end_h},
                        {"weekend_per_h", v.weekend_per_h},
                        {"weekend_evening_per_h", v.weekend_evening_per_h},
                        {"mean_duration_min", v.mean_duration_min},
                        {"rain_aversion", v.rain_aversion},
                        {"rain_max_duration_min", v.rain_max_duration_min},
                        {"cold_cutoff_c", v.cold_cutoff_c},
                        {"cold_factor", v.cold_factor}};
    }
    return json{
        {"seed", s.seed},
        {"duration_days", s.duration_days},
        {"epoch_utc", format_rfc3339(s.epoch_utc)},
        {"squares", squares},
        {"nodes", nodes},
        {"weather",
         {{"temp_min_c", w.temp_min_c},
          {"temp_max_c", w.temp_max_c},
          {"day_jitter_c", w.day_jitter_c},
          {"cold_spells", cold},
          {"rain_events", rain},
          {"sun_offset_c", w.sun_offset_c},
          {"shade_offset_c", w.shade_offset_c},
          {"dry_humidity_rh", w.dry_humidity_rh},
          {"humidity_swing_rh", w.humidity_swing_rh},
          {"overcast_lead_h", w.overcast_lead_h},
          {"reference_step_s", w.reference_step_s}}},
        {"visitors", visitors},
        {"gnss",
         {{"fix_min_s", s.gnss.fix_min_s},
          {"fix_max_s", s.gnss.fix_max_s},
          {"no_reception_probability", s.gnss.no_reception_probability},
          {"accuracy_min_dm", s.gnss.accuracy_min_dm},
          {"accuracy_max_dm", s.gnss.accuracy_max_dm}}},
        {"channel", {{"loss_probability", s.loss_probability}}},
    };
}

Scenario default_scenario() {
    Scenario s;
    s.seed = 20220606;
    s.duration_days = 61;
    s.epoch_utc = parse_rfc3339("2022-06-06T00:00:00Z"); // a Monday

    const auto rect = [](std::string id, std::string name, double lat, double lon) {
        // Slightly irregular pentagon, roughly 70 m x 75 m.
        SquareDefinition sq{std::move(id), std::move(name), {}};
        const double pts[][2] = {{-0.00030, -0.00050}, {-0.00032, 0.00048}, {0.00012, 0.00052},
                                 {0.00031, 0.00010}, {0.00029, -0.00049}};
        for (const auto &p : pts) sq.boundary.push_back(GeoPosition::from_degrees(lat + p[0], lon + p[1], 0));
        return sq;
    };
    constexpr double kLatM = 47.4995, kLonM = 8.7245;
    constexpr double kLatV = 47.5008, kLonV = 8.7401;
    s.squares.push_back(rect("M", "Old town market square", kLatM, kLonM));
    s.squares.push_back(rect("V", "Station square", kLatV, kLonV));

    struct Chair {
        const char *square;
        double dlat, dlon;
        bool sun;
        std::optional<double> dropout;
    };
    const Chair chairs[] = {
        {"M", -0.00010, -0.00020, true, {}},   {"M", -0.00008, 0.00000, true, {}},
        {"M", -0.00012, 0.00018, false, 9.0},  {"M", 0.00000, -0.00015, true, {}},
        {"M", 0.00002, 0.00005, false, {}},    {"M", 0.00004, 0.00020, true, {}},
        {"M", 0.00010, -0.00010, false, 23.0}, {"M", 0.00012, 0.00008, true, {}},
        {"M", 0.00008, 0.00025, false, {}},    {"V", -0.00010, -0.00015, true, {}},
        {"V", -0.00006, 0.00012, false, 31.0}, {"V", 0.00000, -0.00005, true, {}},
        {"V", 0.00004, 0.00018, false, 44.0},  {"V", 0.00010, -0.00020, false, {}},
        {"V", 0.00012, 0.00004, true, {}},     {"V", 0.00006, 0.00022, false, 52.0},
    };
    int n = 1;
    for (const auto &c : chairs) {
        char eui[17];
        std::snprintf(eui, sizeof eui, "70b3d57ed00500%02x", n);
        char label[8];
        std::snprintf(label, sizeof label, "SNZ%02d", n);
        const bool m = std::string_view(c.square) == "M";
        s.nodes.push_back({{eui, label}, c.square, (m ? kLatM : kLatV) + c.dlat, (m ? kLonM : kLonV) + c.dlon, c.sun,
                           c.dropout});
        ++n;
    }

    auto &w = s.weather;
    w.cold_spells = {{40, 3, 8.0, 15.0}, {54, 2, 7.0, 16.0}};
    w.rain_events = {{3, 14.0, 3.0},  {8, 11.0, 4.0},  {12, 6.0, 2.0},  {17, 12.0, 5.0},
                     {22, 16.5, 2.5}, {27, 9.0, 6.0},  {33, 13.0, 2.0}, {41, 10.0, 8.0},
                     {46, 15.0, 3.0}, {51, 12.5, 1.5}, {58, 7.0, 4.0}};

    VisitorProfile m;
    m.daytime_per_h = 0.35;
    m.lunch_peak_per_h = 3.0;
    m.lunch_center_h = 12.5;
    m.lunch_width_h = 0.6;
    m.evening_per_h = 1.2;
    m.evening_start_h = 17.0;
    m.evening_end_h = 20.0;
    m.weekend_per_h = 0.6;
    m.weekend_evening_per_h = 1.5;
    m.mean_duration_min = 20.0;
    m.cold_factor = 0.0;
    s.visitors["M"] = m;

    VisitorProfile v;
    v.daytime_per_h = 0.25;
    v.lunch_peak_per_h = 3.0;
    v.lunch_center_h = 12.25;
    v.lunch_width_h = 0.3;
    v.evening_per_h = 0.3;
    v.evening_start_h = 17.0;
    v.evening_end_h = 19.0;
    v.weekend_per_h = 0.25;
    v.weekend_evening_per_h = 0.0;
    v.mean_duration_min = 12.0;
    v.cold_factor = 0.6;
    s.visitors["V"] = v;
    return s;
}

// ---------------------------------------------------------------------------
// Weather

WeatherModel::WeatherModel(const WeatherConfig &cfg, UnixSeconds epoch, int duration_days, std::uint64_t seed)
    : cfg_(cfg), epoch_(epoch) {
    const int n = duration_days + 1;
    min_.resize(static_cast<std::size_t>(n));
    max_.resize(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) {
        const double u = to_unit(hash_keys({seed, hash_string("day-temperature"), static_cast<std::uint64_t>(d)}));
        const double shift = (2.0 * u - 1.0) * cfg.day_jitter_c;
        min_[static_cast<std::size_t>(d)] = cfg.temp_min_c + shift;
        max_[static_cast<std::size_t>(d)] = cfg.temp_max_c + shift;
    }
    for (const auto &c : cfg.cold_spells) {
        for (int d = c.start_day; d < c.start_day + c.days && d < n; ++d) {
            min_[static_cast<std::size_t>(d)] = c.temp_min_c;
            max_[static_cast<std::size_t>(d)] = c.temp_max_c;
        }
    }
    for (const auto &r : cfg.rain_events) {
        const UnixSeconds start = epoch + r.day * kSecondsPerDay + std::llround(r.start_h * 3600.0);
        rain_.push_back({start, start + std::llround(r.duration_h * 3600.0)});
    }
    std::sort(rain_.begin(), rain_.end(), [](const Span &a, const Span &b) { return a.start < b.start; });
}

int WeatherModel::day_index(UnixSeconds t) const {
    const auto d = (day_start(t) - epoch_) / kSecondsPerDay;
    return static_cast<int>(std::clamp<std::int64_t>(d, 0, static_cast<std::int64_t>(min_.size()) - 1));
}

double WeatherModel::day_min(int day) const {
    return min_[static_cast<std::size_t>(std::clamp(day, 0, days() - 1))];
}
double WeatherModel::day_max(int day) const {
    return max_[static_cast<std::size_t>(std::clamp(day, 0, days() - 1))];
}

double WeatherModel::reference_temperature(UnixSeconds t) const {
    const int d = day_index(t);
    const double mean = day_mean(d);
    const double amp = 0.5 * (day_max(d) - day_min(d));
    // Warmest at 15:00, coldest at 03:00.
    return mean + amp * std::cos(2.0 * std::numbers::pi * (hour_of_day(t) - 15.0) / 24.0);
}

const WeatherModel::Span *WeatherModel::rain_at_or_before(UnixSeconds t) const {
    auto it = std::upper_bound(rain_.begin(), rain_.end(), t, [](UnixSeconds v, const Span &s) { return v < s.start; });
    if (it == rain_.begin()) return nullptr;
    return &*(it - 1);
}

bool WeatherModel::raining(UnixSeconds t) const {
    // Spans may overlap, so scan back over those that started earlier.
    for (auto it = std::upper_bound(rain_.begin(), rain_.end(), t, [](UnixSeconds v, const Span &s) { return v < s.start; });
         it != rain_.begin();) {
        --it;
        if (t < it->end) return true;
        if (t - it->start > 7 * kSecondsPerDay) break;
    }
    return false;
}

bool WeatherModel::deterring(UnixSeconds t) const {
    if (raining(t)) return true;
    const auto lead = std::llround(cfg_.overcast_lead_h * 3600.0);
    auto it = std::upper_bound(rain_.begin(), rain_.end(), t, [](UnixSeconds v, const Span &s) { return v < s.start; });
    return it != rain_.end() && it->start - lead <= t;
}

std::optional<UnixSeconds> WeatherModel::next_deterring_onset(UnixSeconds t) const {
    const auto lead = std::llround(cfg_.overcast_lead_h * 3600.0);
    for (const auto &s : rain_) {
        if (s.start - lead > t) return s.start - lead;
    }
    return std::nullopt;
}

bool WeatherModel::clear_daytime(int day, double start_h, double end_h) const {
    const UnixSeconds lo = epoch_ + day * kSecondsPerDay + std::llround(start_h * 3600.0);
    const UnixSeconds hi = epoch_ + day * kSecondsPerDay + std::llround(end_h * 3600.0);
    return std::none_of(rain_.begin(), rain_.end(), [&](const Span &s) { return s.start < hi && lo < s.end; });
}

double WeatherModel::solar(UnixSeconds t) const {
    if (raining(t)) return 0.0;
    const double h = hour_of_day(t);
    return std::max(0.0, std::sin(std::numbers::pi * (h - 6.0) / 12.0));
}

double WeatherModel::humidity(UnixSeconds t) const {
    const auto dry = [&](UnixSeconds x) {
        return cfg_.dry_humidity_rh + cfg_.humidity_swing_rh * std::cos(2.0 * std::numbers::pi * (hour_of_day(x) - 4.0) / 24.0);
    };
    // Wet value ramps from 80 to ~97 %RH over 20 minutes, with a slow wobble.
    const auto wet = [](UnixSeconds start, UnixSeconds x) {
        const double ramp = std::min(1.0, static_cast<double>(x - start) / 1200.0);
        const double v = 80.0 + 17.0 * ramp + 2.0 * ramp * std::sin(static_cast<double>(x) / 600.0);
        return std::clamp(v, 80.0, 100.0);
    };
    const Span *active = nullptr;
    const Span *last_ended = nullptr;
    for (auto it = std::upper_bound(rain_.begin(), rain_.end(), t, [](UnixSeconds v, const Span &s) { return v < s.start; });
         it != rain_.begin();) {
        --it;
        if (t < it->end) {
            if (active == nullptr || it->start < active->start) active = &*it;
        } else if (last_ended == nullptr || it->end > last_ended->end) {
            last_ended = &*it;
        }
        if (t - it->start > 7 * kSecondsPerDay) break;
    }
    if (active != nullptr) return wet(active->start, t);
    if (last_ended != nullptr && t - last_ended->end < 3 * 3600) {
        const double at_end = wet(last_ended->start, last_ended->end);
        const double d = dry(t);
        return d + (at_end - d) * std::exp(-static_cast<double>(t - last_ended->end) / 1800.0);
    }
    return dry(t);
}

double visitor_intensity(const VisitorProfile &v, const WeatherModel &w, UnixSeconds t) {
    const double h = hour_of_day(t);
    double rate = 0.0;
    if (is_weekend(t)) {
        if (h >= 9.0 && h < 20.0) rate += v.weekend_per_h;
        if (h >= 20.0 && h < 23.0) rate += v.weekend_evening_per_h;
    } else {
        if (h >= 8.0 && h < 20.0) rate += v.daytime_per_h;
        const double z = (h - v.lunch_center_h) / v.lunch_width_h;
        rate += v.lunch_peak_per_h * std::exp(-0.5 * z * z);
        if (h >= v.evening_start_h && h < v.evening_end_h) rate += v.evening_per_h;
    }
    if (w.day_mean(w.day_index(t)) < v.cold_cutoff_c) rate *= v.cold_factor;
    if (w.deterring(t)) rate *= v.rain_aversion;
    return rate;
}

// ---------------------------------------------------------------------------
// World

namespace {

class ChairTrace final : public EnvTrace {
public:
    ChairTrace(std::shared_ptr<const WeatherModel> weather, std::vector<SittingEpisode> episodes, Vec3 baseline,
               std::uint64_t seed, bool sun_exposed, double noise_offset_db, const WeatherConfig &wcfg, GnssConfig gnss,
               double lat, double lon)
        : weather_(std::move(weather)), episodes_(std::move(episodes)), baseline_(baseline), seed_(seed),
          sun_exposed_(sun_exposed), noise_offset_db_(noise_offset_db), sun_offset_c_(wcfg.sun_offset_c),
          shade_offset_c_(wcfg.shade_offset_c), gnss_(gnss), lat_(lat), lon_(lon) {}

    double temperature_c(std::uint64_t t_s) const override {
        const UnixSeconds t = unix_time(t_s);
        const double heat = (sun_exposed_ ? sun_offset_c_ : shade_offset_c_) * weather_->solar(t);
        return weather_->reference_temperature(t) + heat + jitter(t_s, 0x7e, 0.2);
    }

    double humidity_rh(std::uint64_t t_s) const override {
        const UnixSeconds t = unix_time(t_s);
        const double h = weather_->humidity(t) + jitter(t_s, 0x4d, 1.0);
        return weather_->raining(t) ? std::clamp(h, 80.0, 100.0) : std::clamp(h, 0.0, 100.0);
    }

    double noise_db(std::uint64_t t_s) const override {
        const UnixSeconds t = unix_time(t_s);
        const double h = hour_of_day(t);
        const double activity = std::max(0.0, std::sin(std::numbers::pi * (h - 6.0) / 16.0));
        double db = 38.0 + 14.0 * activity + noise_offset_db_;
        if (episode_at(episodes_, t_s) != nullptr) db += 3.0;
        if (weather_->raining(t)) db += 6.0;
        return db + jitter(t_s, 0x5a, 3.0);
    }

    void accel_second(std::uint64_t t_s, std::span<Vec3> out) const override {
        const SittingEpisode *ep = episode_at(episodes_, t_s);
        const Vec3 level = ep != nullptr ? baseline_ + ep->deviation_g : baseline_;
        const double amp = ep != nullptr ? 0.03 : 0.01;
        FastRng rng(hash_keys({seed_, 0xacc, t_s}));
        constexpr double kScale = 1.0 / static_cast<double>(1u << 21);
        for (auto &s : out) {
            const std::uint64_t bits = rng.next();
            const auto axis = [&](int shift) {
                return (static_cast<double>((bits >> shift) & 0x1FFFFF) * kScale * 2.0 - 1.0) * amp;
            };
            s = {level.x + axis(0), level.y + axis(21), level.z + axis(42)};
        }
    }

    double gnss_fix_delay_s(std::uint64_t t_s) const override {
        const std::uint64_t h = hash_keys({seed_, 0x6e55, t_s});
        if (to_unit(h) < gnss_.no_reception_probability) return std::numeric_limits<double>::infinity();
        return gnss_.fix_min_s + to_unit(mix64(h)) * (gnss_.fix_max_s - gnss_.fix_min_s);
    }

    GeoPosition fix_position(std::uint64_t t_s) const override {
        FastRng rng(hash_keys({seed_, 0xf1c5, t_s}));
        const double lat = lat_ + rng.uniform(-2e-5, 2e-5);
        const double lon = lon_ + rng.uniform(-2e-5, 2e-5);
        const auto acc = static_cast<std::uint16_t>(gnss_.accuracy_min_dm +
                                                    static_cast<int>(rng.next() % static_cast<std::uint64_t>(
                                                                         gnss_.accuracy_max_dm - gnss_.accuracy_min_dm + 1)));
        return GeoPosition::from_degrees(lat, lon, acc);
    }

private:
    [[nodiscard]] UnixSeconds unix_time(std::uint64_t t_s) const { return weather_->epoch() + static_cast<UnixSeconds>(t_s); }
    [[nodiscard]] double jitter(std::uint64_t t_s, std::uint64_t salt, double half_width) const {
        return (2.0 * to_unit(hash_keys({seed_, salt, t_s})) - 1.0) * half_width;
    }

    std::shared_ptr<const WeatherModel> weather_;
    std::vector<SittingEpisode> episodes_;
    Vec3 baseline_;
    std::uint64_t seed_;
    bool sun_exposed_;
    double noise_offset_db_;
    double sun_offset_c_;
    double shade_offset_c_;
    GnssConfig gnss_;
    double lat_;
    double lon_;
};

// Thinned Poisson arrivals; an arrival is ignored while the chair is taken.
std::vector<SittingEpisode> generate_episodes(const VisitorProfile &v, const WeatherModel &w, int duration_days,
                                              std::uint64_t seed) {
    FastRng rng(seed);
    const double peak = v.daytime_per_h + v.lunch_peak_per_h + v.evening_per_h + v.weekend_per_h + v.weekend_evening_per_h;
    std::vector<SittingEpisode> out;
    if (peak <= 0.0) return out;
    const UnixSeconds epoch = w.epoch();
    const double end_s = static_cast<double>(duration_days) * kSecondsPerDay;
    double t = 0.0;
    std::uint64_t free_from = 0;
    for (;;) {
        t += rng.exponential(3600.0 / peak);
        if (t >= end_s) break;
        const double accept = rng.uniform();
        const auto ts = static_cast<std::uint64_t>(t);
        const UnixSeconds abs = epoch + static_cast<UnixSeconds>(ts);
        if (accept * peak >= visitor_intensity(v, w, abs) || ts < free_from) continue;

        double dur = std::clamp(rng.exponential(v.mean_duration_min * 60.0), 60.0, 3.0 * 3600.0);
        std::uint64_t end = ts + static_cast<std::uint64_t>(dur);
        if (w.deterring(abs)) {
            end = std::min<std::uint64_t>(end, ts + static_cast<std::uint64_t>(v.rain_max_duration_min * 60.0));
        } else if (auto onset = w.next_deterring_onset(abs)) {
            end = std::min<std::uint64_t>(end, static_cast<std::uint64_t>(*onset - epoch));
        }
        // Nobody stays past midnight.
        const auto midnight = static_cast<std::uint64_t>(day_start(abs) + kSecondsPerDay - epoch);
        end = std::min(end, midnight);
        if (end <= ts) continue;

        // Random direction, 0.08..0.2 g.
        Vec3 dir{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        if (dir.norm() < 1e-3) dir = {0.0, 0.0, -1.0};
        const double mag = rng.uniform(0.08, 0.2);
        out.push_back({ts, end, dir * (mag / dir.norm())});
        free_from = end + 30;
    }
    return out;
}

} // namespace

World build_world(const Scenario &s) {
    validate_scenario(s);
    World world;
    world.squares = s.squares;
    world.weather = std::make_shared<const WeatherModel>(s.weather, s.epoch_utc, s.duration_days, s.seed);
    const auto &w = *world.weather;

    const UnixSeconds end = s.epoch_utc + static_cast<UnixSeconds>(s.duration_days) * kSecondsPerDay;
    for (UnixSeconds t = s.epoch_utc; t <= end; t += s.weather.reference_step_s) {
        world.reference.samples.push_back({t, w.reference_temperature(t), w.raining(t)});
    }

    world.channel.loss_probability = s.loss_probability;
    world.channel.seed = hash_keys({s.seed, hash_string("channel")});

    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
        const auto &n = s.nodes[i];
        const std::uint64_t node_seed = hash_keys({s.seed, hash_string(n.identity.dev_eui)});
        VisitorProfile profile;
        if (auto it = s.visitors.find(n.square_id); it != s.visitors.end()) profile = it->second;

        NodeWorld nw;
        nw.config.identity = n.identity;
        nw.config.epoch_utc = s.epoch_utc;
        nw.square_id = n.square_id;
        nw.sun_exposed = n.sun_exposed;
        nw.episodes = generate_episodes(profile, w, s.duration_days, hash_keys({node_seed, hash_string("visits")}));
        if (n.dropout_day) {
            nw.dropout_at = s.epoch_utc + std::llround(*n.dropout_day * kSecondsPerDay);
            world.channel.dropout_at[n.identity.dev_eui] = *nw.dropout_at;
        }

        FastRng tilt(hash_keys({node_seed, hash_string("tilt")}));
        const double a = tilt.uniform(-0.05, 0.05);
        const double b = tilt.uniform(-0.05, 0.05);
        const Vec3 baseline{a, b, std::sqrt(1.0 - a * a - b * b)};
        // Square ids are arbitrary; the first square in the file is the livelier one.
        const double noise_offset = n.square_id == s.squares.front().id ? 4.0 : 0.0;
        nw.trace = std::make_shared<ChairTrace>(world.weather, nw.episodes, baseline, node_seed, n.sun_exposed,
                                                noise_offset, s.weather, s.gnss, n.lat, n.lon);
        world.nodes.push_back(std::move(nw));
    }
    return world;
}

} // namespace urbansense
