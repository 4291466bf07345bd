#include "scoot/scenario.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace scoot {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_number(const std::string& raw, const std::string& context) {
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ScenarioError(context + ": expected a number, got '" + raw + "'");
    }
}

std::string format_number(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        return buf;
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

Scenario Scenario::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path);
}

Scenario Scenario::parse_text(const std::string& text, const std::string& origin) {
    Scenario sc;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto where = origin + ":" + std::to_string(line_no);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ScenarioError(where + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ScenarioError(where + ": empty key");
        if (value.empty()) throw ScenarioError(where + ": empty value for '" + key + "'");
        Value v;
        if (value.front() == '[') {
            if (value.back() != ']') throw ScenarioError(where + ": unterminated array");
            v.is_array = true;
            std::string inner = value.substr(1, value.size() - 2);
            std::string item;
            std::istringstream items(inner);
            while (std::getline(items, item, ',')) {
                item = trim(item);
                if (!item.empty()) v.items.push_back(item);
            }
        } else {
            v.raw = value;
        }
        sc.upsert(key) = std::move(v);
    }
    return sc;
}

const Scenario::Value* Scenario::find(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return &v;
    }
    return nullptr;
}

Scenario::Value& Scenario::upsert(const std::string& key) {
    for (auto& [k, v] : entries_) {
        if (k == key) return v;
    }
    entries_.emplace_back(key, Value{});
    return entries_.back().second;
}

bool Scenario::has(const std::string& key) const { return find(key) != nullptr; }

double Scenario::number(const std::string& key) const {
    const Value* v = find(key);
    if (!v || v->is_array) throw ScenarioError("missing scalar key '" + key + "'");
    return parse_number(v->raw, "key '" + key + "'");
}

double Scenario::number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

std::string Scenario::word(const std::string& key) const {
    const Value* v = find(key);
    if (!v || v->is_array) throw ScenarioError("missing key '" + key + "'");
    return v->raw;
}

std::string Scenario::word_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? word(key) : fallback;
}

std::vector<double> Scenario::numbers(const std::string& key) const {
    const Value* v = find(key);
    if (!v) throw ScenarioError("missing array key '" + key + "'");
    std::vector<double> out;
    if (v->is_array) {
        for (const auto& item : v->items) out.push_back(parse_number(item, "key '" + key + "'"));
    } else {
        out.push_back(parse_number(v->raw, "key '" + key + "'"));
    }
    return out;
}

std::vector<double> Scenario::numbers_or(const std::string& key,
                                         std::vector<double> fallback) const {
    return has(key) ? numbers(key) : std::move(fallback);
}

std::vector<std::string> Scenario::words(const std::string& key) const {
    const Value* v = find(key);
    if (!v) throw ScenarioError("missing array key '" + key + "'");
    if (!v->is_array) return {v->raw};
    return v->items;
}

std::vector<std::string> Scenario::words_or(const std::string& key,
                                            std::vector<std::string> fallback) const {
    return has(key) ? words(key) : std::move(fallback);
}

void Scenario::set(const std::string& key, double v) {
    Value& val = upsert(key);
    val.is_array = false;
    val.items.clear();
    val.raw = format_number(v);
}

void Scenario::set(const std::string& key, const std::string& v) {
    Value& val = upsert(key);
    val.is_array = false;
    val.items.clear();
    val.raw = v;
}

void Scenario::set(const std::string& key, const std::vector<double>& v) {
    Value& val = upsert(key);
    val.is_array = true;
    val.raw.clear();
    val.items.clear();
    for (double x : v) val.items.push_back(format_number(x));
}

void Scenario::set_words(const std::string& key, const std::vector<std::string>& v) {
    Value& val = upsert(key);
    val.is_array = true;
    val.raw.clear();
    val.items = v;
}

std::string Scenario::to_text() const {
    std::ostringstream out;
    for (const auto& [k, v] : entries_) {
        out << k << " = ";
        if (v.is_array) {
            out << "[";
            for (std::size_t i = 0; i < v.items.size(); ++i) {
                if (i) out << ", ";
                out << v.items[i];
            }
            out << "]";
        } else {
            out << v.raw;
        }
        out << "\n";
    }
    return out.str();
}

void Scenario::write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ScenarioError("cannot write file: " + path);
    out << to_text();
}

SystemParams params_from_scenario(const Scenario& sc) {
    SystemParams p;
    p.region = sc.number_or("phi", p.region);
    p.demand = sc.number_or("lambda", p.demand);
    p.battery_levels = static_cast<int>(sc.number_or("battery_levels", p.battery_levels));
    p.max_trip_levels = static_cast<int>(sc.number_or("max_trip_levels", p.max_trip_levels));
    p.speed_scooter = sc.number_or("v_s", p.speed_scooter);
    p.speed_walk = sc.number_or("v_w", p.speed_walk);
    p.speed_truck = sc.number_or("v_t", p.speed_truck);
    p.cost_scooter = sc.number_or("gamma", p.cost_scooter);
    p.value_of_time = sc.number_or("beta", p.value_of_time);
    p.cost_station = sc.number_or("omega1", p.cost_station);
    p.cost_charger = sc.number_or("omega2", p.cost_charger);
    p.cost_truck_km = sc.number_or("kappa", p.cost_truck_km);
    p.depot_distance = sc.number_or("l_f", 2.0 * p.region);
    const std::string profile = sc.word_or("charge_profile", "piecewise");
    const double total = sc.number_or("charge_total", 8.0);
    if (profile == "linear") {
        p.charging = ChargingProfile::linear(p.battery_levels, total);
    } else if (profile == "piecewise") {
        p.charging = ChargingProfile::piecewise(p.battery_levels, total);
    } else if (profile == "explicit") {
        p.charging = ChargingProfile::explicit_profile(sc.numbers("tau"));
    } else {
        throw ScenarioError("unknown charge_profile '" + profile + "'");
    }
    return p;
}

DesignVariables design_from_scenario(const Scenario& sc, const SystemParams& params) {
    DesignVariables d;
    d.grid_dim = static_cast<int>(sc.number_or("K", 0));
    d.chargers = sc.number_or("Q", 0.0);
    d.headway = sc.number_or("H", 1.0);
    d.truck_load = sc.number_or("R", 20.0);
    d.promotions = sc.numbers_or("pi", {});
    d.promotions.resize(params.battery_levels, 0.0);
    d.weights = make_priority_weights(priority_scheme_from_string(sc.word_or("scheme", "pw1")),
                                      params.battery_levels, params.max_trip_levels);
    if (sc.has("n_station")) {
        d.n_station = sc.numbers("n_station");
        d.n_station.resize(params.battery_levels + 1, 0.0);
    }
    if (sc.has("n_random")) {
        d.n_random = sc.numbers("n_random");
        d.n_random.resize(params.battery_levels, 0.0);
    }
    return d;
}

OptimizerBounds bounds_from_scenario(const Scenario& sc) {
    OptimizerBounds b;
    b.spacing_min = sc.number_or("S_min", b.spacing_min);
    b.spacing_max = sc.number_or("S_max", b.spacing_max);
    b.chargers_min = sc.number_or("Q_min", b.chargers_min);
    b.chargers_max = sc.number_or("Q_max", b.chargers_max);
    b.headway_min = sc.number_or("H_min", b.headway_min);
    b.headway_max = sc.number_or("H_max", b.headway_max);
    b.load_min = sc.number_or("R_min", b.load_min);
    b.load_max = sc.number_or("R_max", b.load_max);
    return b;
}

void scenario_set_params(Scenario& sc, const SystemParams& params) {
    sc.set("phi", params.region);
    sc.set("lambda", params.demand);
    sc.set("battery_levels", static_cast<double>(params.battery_levels));
    sc.set("max_trip_levels", static_cast<double>(params.max_trip_levels));
    sc.set("v_s", params.speed_scooter);
    sc.set("v_w", params.speed_walk);
    sc.set("v_t", params.speed_truck);
    sc.set("gamma", params.cost_scooter);
    sc.set("beta", params.value_of_time);
    sc.set("omega1", params.cost_station);
    sc.set("omega2", params.cost_charger);
    sc.set("kappa", params.cost_truck_km);
    sc.set("l_f", params.depot_distance);
    switch (params.charging.kind) {
        case ChargingKind::Linear: sc.set("charge_profile", "linear"); break;
        case ChargingKind::Piecewise: sc.set("charge_profile", "piecewise"); break;
        case ChargingKind::Explicit: sc.set("charge_profile", "explicit"); break;
    }
    sc.set("charge_total", params.charging.total());
    if (params.charging.kind == ChargingKind::Explicit) sc.set("tau", params.charging.tau);
}

void scenario_set_design(Scenario& sc, const DesignVariables& design) {
    sc.set("K", static_cast<double>(design.grid_dim));
    sc.set("Q", design.chargers);
    sc.set("H", design.headway);
    sc.set("R", design.truck_load);
    sc.set("pi", design.promotions);
    if (!design.n_station.empty()) sc.set("n_station", design.n_station);
    if (!design.n_random.empty()) sc.set("n_random", design.n_random);
}

void scenario_set_bounds(Scenario& sc, const OptimizerBounds& bounds) {
    sc.set("S_min", bounds.spacing_min);
    sc.set("S_max", bounds.spacing_max);
    sc.set("Q_min", bounds.chargers_min);
    sc.set("Q_max", bounds.chargers_max);
    sc.set("H_min", bounds.headway_min);
    sc.set("H_max", bounds.headway_max);
    sc.set("R_min", bounds.load_min);
    sc.set("R_max", bounds.load_max);
}

} // namespace scoot
