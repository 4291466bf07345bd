#pragma once

#include <cstdint>
#include <vector>

#include "scoot/core.hpp"
#include "scoot/trucks.hpp"

namespace scoot {

// How the idle-random spatial field is represented.
//
// Uniformized: pickup distances are drawn from the uniform-field law at the
// realized class counts, so the field stays statistically uniform — the
// regime the closed-form performance laws describe. Persistent: every idle
// vehicle keeps its exact drop position and riders take the true nearest one.
// Selective nearest-vehicle removal makes the persistent field self-organize
// into clusters and voids (measured nearest-distance inflation up to ~3x in
// isolation), a regime outside the analytical laws; it is kept as an
// experimentation mode.
enum class FieldModel { Uniformized, Persistent };

struct SimConfig {
    SystemParams params;
    DesignVariables design;             // grid, chargers, promotions, headway, load, weights
    double fleet = 0.0;                 // total vehicles (rounded to an integer)
    double initial_station_total = 0.0; // vehicles seeded at stations at t = 0
    double horizon = 2000.0;
    double warmup = 800.0;
    double cooldown = 200.0;
    std::uint64_t seed = 1;
    FieldModel field_model = FieldModel::Uniformized;
    RoutePlannerConfig route_cfg;

    bool valid() const { return horizon > warmup + cooldown && fleet >= 1.0; }
};

// Service-status axis of the vehicle state space.
enum class VehicleStatus : std::uint8_t {
    IdleRandom = 0,
    IdleStation = 1,
    Booked = 2,
    InUse = 3,
    OnTruck = 4,
    AtDepot = 5,
};
inline constexpr int kStatusCount = 6;

struct SimStats {
    long long requests = 0;
    long long served = 0;
    long long lost = 0;
    double lost_fraction = 0.0;
    double mean_trip_duration = 0.0;
    double p90_trip_duration = 0.0;
    double mean_wait = 0.0; // request to pickup
    double booking_rate = 0.0;
    double avg_booked = 0.0; // time-averaged vehicles awaiting pickup
    double avg_inuse = 0.0;
    std::vector<double> avg_counts; // (B+1) x 6, time-averaged over the window
    std::vector<long long> bookings_by_type;
    std::vector<long long> drops_by_type;
    std::vector<double> mean_pickup_by_type; // walk distance, request to vehicle
    long long station_bookings = 0;
    long long station_suitable_events = 0; // requests whose nearest station held a suitable vehicle
    long long station_dropoffs = 0;
    double promotion_paid = 0.0;
    double truck_distance = 0.0;
    double window = 0.0;
    long long fleet_total = 0;
    bool invariants_ok = true;

    double avg_count(int soc, VehicleStatus st) const {
        return avg_counts[static_cast<std::size_t>(soc) * kStatusCount + static_cast<int>(st)];
    }
};

SimStats run_simulation(const SimConfig& config);

} // namespace scoot
