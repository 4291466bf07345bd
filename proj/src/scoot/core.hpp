#pragma once

#include <string>
#include <vector>

namespace scoot {

enum class ChargingKind { Linear, Piecewise, Explicit };

// Per-level charge durations tau[0..B-1]; tau[b] is the time from SoC b to b+1.
struct ChargingProfile {
    ChargingKind kind = ChargingKind::Linear;
    std::vector<double> tau;

    double total() const;

    // All levels charge at the same rate.
    static ChargingProfile linear(int battery_levels, double total_time);
    // Constant rate below the 80% SoC threshold, half rate above it, scaled so
    // the durations sum to total_time.
    static ChargingProfile piecewise(int battery_levels, double total_time);
    static ChargingProfile explicit_profile(std::vector<double> tau);
};

struct SystemParams {
    double region = 10.0;        // side length of the square service region [du]
    double demand = 1.0;         // trip generation density [trips/tu-du^2]
    int battery_levels = 8;      // SoC levels; one level = one du of range
    int max_trip_levels = 3;     // longest trip [du], integer by construction
    double speed_scooter = 15.0; // [du/tu]
    double speed_walk = 3.0;
    double speed_truck = 20.0;
    double cost_scooter = 1.0;   // [$ per scooter-tu]
    double value_of_time = 20.0; // [$ per rider-tu]
    double cost_station = 0.3;   // [$ per station-tu]
    double cost_charger = 0.06;  // [$ per charger-tu]
    double cost_truck_km = 4.0;  // [$ per truck-du]
    double depot_distance = 20.0;// depot to region center [du]
    ChargingProfile charging;

    double area() const { return region * region; }
    double trip_rate() const { return demand * area(); } // [trips/tu]
};

enum class PriorityScheme { PW1, PW2, PW3 };

PriorityScheme priority_scheme_from_string(const std::string& s);
std::string to_string(PriorityScheme s);

// Availability weights for station vehicles: rows are trip types 1..L_max,
// columns are SoC 0..B. Zero below the trip type; row sums must be positive.
struct PriorityWeights {
    int battery_levels = 0;
    int max_trip_levels = 0;
    std::vector<double> w; // row-major, max_trip_levels x (battery_levels + 1)

    double at(int trip_type, int soc) const {
        return w[(trip_type - 1) * (battery_levels + 1) + soc];
    }
    double& at(int trip_type, int soc) {
        return w[(trip_type - 1) * (battery_levels + 1) + soc];
    }
    bool suitable_at_station(int trip_type, int soc) const { return at(trip_type, soc) > 0.0; }
};

PriorityWeights make_priority_weights(PriorityScheme scheme, int battery_levels, int max_trip_levels);

struct DesignVariables {
    std::vector<double> n_station; // idle count per SoC 0..B at stations
    std::vector<double> n_random;  // idle count per SoC 1..B at random locations
    int grid_dim = 0;              // K; K^2 stations
    double chargers = 0.0;         // Q, continuous during optimization
    std::vector<double> promotions;// per post-trip SoC 0..B-1 [$ per trip]
    double headway = 1.0;          // repositioning headway [tu]
    double truck_load = 20.0;      // full scooters carried per truck dispatch
    PriorityWeights weights;

    double station_total() const;
    double random_total() const;
    double station_spacing(double region) const { return grid_dim > 0 ? region / grid_dim : 0.0; }
};

struct OptimizerBounds {
    double spacing_min = 0.5;
    double spacing_max = 5.0;
    double chargers_min = 5.0;
    double chargers_max = 20.0;
    double headway_min = 1.0 / 6.0;
    double headway_max = 12.0;
    double load_min = 5.0;
    double load_max = 50.0;

    bool valid() const {
        return spacing_min <= spacing_max && chargers_min <= chargers_max &&
               headway_min <= headway_max && load_min <= load_max;
    }
};

struct ConstraintViolation {
    std::string id;      // stable identifier, e.g. "promotion-cap"
    std::string message; // human-readable description
    double amount = 0.0; // magnitude of the violation where meaningful
};

// Checks parameter positivity, weight validity, and all design bound
// constraints. Violations are data; an empty list means the design is valid.
std::vector<ConstraintViolation> validate(const SystemParams& params,
                                          const DesignVariables& design,
                                          const OptimizerBounds& bounds = OptimizerBounds{});

} // namespace scoot
