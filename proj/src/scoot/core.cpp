#include "scoot/core.hpp"

#include <cmath>
#include <stdexcept>

namespace scoot {

double ChargingProfile::total() const {
    double s = 0.0;
    for (double t : tau) s += t;
    return s;
}

ChargingProfile ChargingProfile::linear(int battery_levels, double total_time) {
    if (battery_levels < 1 || !(total_time > 0.0)) {
        throw std::invalid_argument("linear charging profile needs B >= 1 and positive total time");
    }
    ChargingProfile p;
    p.kind = ChargingKind::Linear;
    p.tau.assign(battery_levels, total_time / battery_levels);
    return p;
}

ChargingProfile ChargingProfile::piecewise(int battery_levels, double total_time) {
    if (battery_levels < 1 || !(total_time > 0.0)) {
        throw std::invalid_argument("piecewise charging profile needs B >= 1 and positive total time");
    }
    ChargingProfile p;
    p.kind = ChargingKind::Piecewise;
    p.tau.resize(battery_levels);
    const double threshold = 0.8 * battery_levels;
    // Weight each level by the time it takes at unit rate below the threshold
    // and double duration above it, then scale so the sum is total_time.
    double weight_sum = 0.0;
    for (int b = 0; b < battery_levels; ++b) {
        const double below = std::max(0.0, std::min(static_cast<double>(b + 1), threshold) - b);
        const double above = 1.0 - below;
        p.tau[b] = below + 2.0 * above;
        weight_sum += p.tau[b];
    }
    for (double& t : p.tau) t *= total_time / weight_sum;
    return p;
}

ChargingProfile ChargingProfile::explicit_profile(std::vector<double> tau) {
    ChargingProfile p;
    p.kind = ChargingKind::Explicit;
    p.tau = std::move(tau);
    return p;
}

PriorityScheme priority_scheme_from_string(const std::string& s) {
    if (s == "pw1" || s == "PW1" || s == "pw-1" || s == "PW-1") return PriorityScheme::PW1;
    if (s == "pw2" || s == "PW2" || s == "pw-2" || s == "PW-2") return PriorityScheme::PW2;
    if (s == "pw3" || s == "PW3" || s == "pw-3" || s == "PW-3") return PriorityScheme::PW3;
    throw std::invalid_argument("unknown priority scheme: " + s);
}

std::string to_string(PriorityScheme s) {
    switch (s) {
        case PriorityScheme::PW1: return "pw1";
        case PriorityScheme::PW2: return "pw2";
        case PriorityScheme::PW3: return "pw3";
    }
    return "pw1";
}

PriorityWeights make_priority_weights(PriorityScheme scheme, int battery_levels, int max_trip_levels) {
    if (battery_levels < max_trip_levels || max_trip_levels < 1) {
        throw std::invalid_argument("make_priority_weights: need B >= L_max >= 1");
    }
    PriorityWeights pw;
    pw.battery_levels = battery_levels;
    pw.max_trip_levels = max_trip_levels;
    pw.w.assign(static_cast<std::size_t>(max_trip_levels) * (battery_levels + 1), 0.0);
    const int near_full = static_cast<int>(std::floor(0.8 * battery_levels));
    for (int t = 1; t <= max_trip_levels; ++t) {
        for (int b = t; b <= battery_levels; ++b) {
            switch (scheme) {
                case PriorityScheme::PW1:
                    pw.at(t, b) = 1.0;
                    break;
                case PriorityScheme::PW2:
                    pw.at(t, b) = static_cast<double>(b - t + 1);
                    break;
                case PriorityScheme::PW3:
                    if (b >= near_full) {
                        pw.at(t, b) = std::pow(10.0, b - t + 1);
                    } else if (b == 1) {
                        pw.at(t, b) = 0.0;
                    } else {
                        pw.at(t, b) = static_cast<double>(b - t + 1);
                    }
                    break;
            }
        }
    }
    return pw;
}

double DesignVariables::station_total() const {
    double s = 0.0;
    for (double v : n_station) s += v;
    return s;
}

double DesignVariables::random_total() const {
    double s = 0.0;
    for (double v : n_random) s += v;
    return s;
}

namespace {

void require_positive(std::vector<ConstraintViolation>& out, double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        out.push_back({"param-positive", std::string(name) + " must be strictly positive", v});
    }
}

} // namespace

std::vector<ConstraintViolation> validate(const SystemParams& params,
                                          const DesignVariables& design,
                                          const OptimizerBounds& bounds) {
    std::vector<ConstraintViolation> out;

    require_positive(out, params.region, "region");
    require_positive(out, params.demand, "demand");
    require_positive(out, params.speed_scooter, "speed_scooter");
    require_positive(out, params.speed_walk, "speed_walk");
    require_positive(out, params.speed_truck, "speed_truck");
    require_positive(out, params.cost_scooter, "cost_scooter");
    require_positive(out, params.value_of_time, "value_of_time");
    require_positive(out, params.cost_station, "cost_station");
    require_positive(out, params.cost_charger, "cost_charger");
    require_positive(out, params.cost_truck_km, "cost_truck_km");
    require_positive(out, params.depot_distance, "depot_distance");
    if (params.battery_levels < 1) {
        out.push_back({"battery-levels", "battery_levels must be >= 1",
                       static_cast<double>(params.battery_levels)});
    }
    if (params.max_trip_levels < 1 || params.max_trip_levels > params.battery_levels) {
        out.push_back({"trip-range", "max_trip_levels must lie in [1, battery_levels]",
                       static_cast<double>(params.max_trip_levels)});
    }
    if (static_cast<int>(params.charging.tau.size()) != params.battery_levels) {
        out.push_back({"charging-profile", "charging profile must have one duration per level",
                       static_cast<double>(params.charging.tau.size())});
    }
    for (double t : params.charging.tau) {
        if (!(t > 0.0)) {
            out.push_back({"charging-profile", "charge durations must be strictly positive", t});
            break;
        }
    }

    // Nonnegativity of every count and decision.
    for (double v : design.n_station) {
        if (v < 0.0) { out.push_back({"nonnegative", "station idle counts must be >= 0", v}); break; }
    }
    for (double v : design.n_random) {
        if (v < 0.0) { out.push_back({"nonnegative", "random idle counts must be >= 0", v}); break; }
    }
    for (double v : design.promotions) {
        if (v < 0.0) { out.push_back({"nonnegative", "promotions must be >= 0", v}); break; }
    }
    if (design.headway < 0.0 || design.truck_load < 0.0) {
        out.push_back({"nonnegative", "headway and truck load must be >= 0", 0.0});
    }

    const bool stations_present = design.grid_dim > 0;
    if (stations_present) {
        const double spacing = design.station_spacing(params.region);
        const double cap = params.value_of_time * spacing / params.speed_walk;
        for (std::size_t j = 0; j < design.promotions.size(); ++j) {
            if (design.promotions[j] > cap * (1.0 + 1e-12) + 1e-12) {
                out.push_back({"promotion-cap",
                               "promotion exceeds walking-disutility cap (value-of-time * spacing / walk speed)",
                               design.promotions[j] - cap});
            }
        }
        const double capacity = static_cast<double>(design.grid_dim) * design.grid_dim * design.chargers;
        const double total_station = design.station_total();
        if (total_station > capacity * (1.0 + 1e-12) + 1e-9) {
            out.push_back({"station-capacity", "total station idle count exceeds total charger capacity",
                           total_station - capacity});
        }
        if (bounds.valid()) {
            const double k_lo = params.region / bounds.spacing_max;
            const double k_hi = params.region / bounds.spacing_min;
            if (design.grid_dim < k_lo - 1e-9 || design.grid_dim > k_hi + 1e-9) {
                out.push_back({"spacing-bounds", "grid dimension outside spacing bounds",
                               static_cast<double>(design.grid_dim)});
            }
            if (design.chargers < bounds.chargers_min - 1e-9 || design.chargers > bounds.chargers_max + 1e-9) {
                out.push_back({"chargers-bounds", "chargers per station outside bounds", design.chargers});
            }
        }
        if (design.chargers != std::floor(design.chargers)) {
            out.push_back({"integer-domain", "chargers per station must be integer in a final design",
                           design.chargers});
        }
    }
    if (!bounds.valid()) {
        out.push_back({"bounds-order", "optimizer bounds must satisfy min <= max", 0.0});
    } else {
        if (design.headway < bounds.headway_min - 1e-9 || design.headway > bounds.headway_max + 1e-9) {
            out.push_back({"headway-bounds", "headway outside bounds", design.headway});
        }
        if (design.truck_load < bounds.load_min - 1e-9 || design.truck_load > bounds.load_max + 1e-9) {
            out.push_back({"load-bounds", "truck load outside bounds", design.truck_load});
        }
    }

    // Weight validity: zero below the trip type, positive row sums.
    const auto& pw = design.weights;
    if (pw.battery_levels == params.battery_levels && pw.max_trip_levels == params.max_trip_levels) {
        for (int t = 1; t <= pw.max_trip_levels; ++t) {
            double row = 0.0;
            for (int b = 0; b <= pw.battery_levels; ++b) {
                const double v = pw.at(t, b);
                if (b < t && v != 0.0) {
                    out.push_back({"weights-support", "priority weight must be zero below the trip type", v});
                }
                if (v < 0.0) {
                    out.push_back({"weights-nonnegative", "priority weights must be >= 0", v});
                }
                row += v;
            }
            if (!(row > 0.0)) {
                out.push_back({"weights-row-sum", "every trip type needs at least one positive weight",
                               static_cast<double>(t)});
            }
        }
    } else if (!pw.w.empty()) {
        out.push_back({"weights-shape", "priority weight dimensions do not match the system", 0.0});
    }

    return out;
}

} // namespace scoot
