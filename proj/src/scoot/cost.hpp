#pragma once

#include "scoot/core.hpp"
#include "scoot/solver.hpp"

namespace scoot {

struct CostBreakdown {
    double station_cost = 0.0;       // station amortization [$ per tu]
    double charger_cost = 0.0;       // charger amortization
    double fleet_cost = 0.0;         // vehicle operating cost
    double repositioning_cost = 0.0; // truck distance cost
    double promotion_cost = 0.0;     // payouts for station drop-offs
    double rider_time_cost = 0.0;    // value-of-time of riders in the system
    double per_rider = 0.0;          // Z, system-wide cost per served trip
    double mean_trip_duration = 0.0; // request to drop-off [tu]
    double served_rate = 0.0;        // trips per tu

    double total_rate() const {
        return station_cost + charger_cost + fleet_cost + repositioning_cost + promotion_cost +
               rider_time_cost;
    }
    double agency_per_rider() const {
        return served_rate > 0.0
                   ? (station_cost + charger_cost + fleet_cost + repositioning_cost + promotion_cost) /
                         served_rate
                   : 0.0;
    }
};

// Assembles the system-wide cost rate and the per-rider average at a converged
// steady state.
CostBreakdown cost_breakdown(const SystemParams& params, const SteadyState& steady,
                             const DesignVariables& design);

// Comparator with no vehicles at all: every rider walks the whole trip.
CostBreakdown benchmark_walk_only(const SystemParams& params);

} // namespace scoot
