#include "scoot/cost.hpp"

namespace scoot {

CostBreakdown cost_breakdown(const SystemParams& params, const SteadyState& steady,
                             const DesignVariables& design) {
    CostBreakdown c;
    const int levels = params.battery_levels;
    const int k2 = design.grid_dim * design.grid_dim;
    c.station_cost = params.cost_station * k2;
    c.charger_cost = params.cost_charger * k2 * design.chargers;
    c.fleet_cost = params.cost_scooter * steady.fleet;
    if (design.headway > 0.0) {
        c.repositioning_cost = params.cost_truck_km * steady.route_length / design.headway;
    }
    for (int j = 0; j < levels; ++j) {
        const double promo = j < static_cast<int>(design.promotions.size()) ? design.promotions[j] : 0.0;
        if (promo > 0.0) c.promotion_cost += promo * steady.flow.station_drop_inflow(j);
    }
    double riders = 0.0;
    for (int b = 1; b <= levels; ++b) riders += steady.n_booked[b] + steady.n_inuse[b];
    c.rider_time_cost = params.value_of_time * riders;
    c.served_rate = params.trip_rate();
    c.mean_trip_duration = riders / c.served_rate;
    c.per_rider = c.total_rate() / c.served_rate;
    return c;
}

CostBreakdown benchmark_walk_only(const SystemParams& params) {
    CostBreakdown c;
    const TripTypeProfile profile = trip_type_profile(params.demand, params.max_trip_levels);
    const double walk_time = profile.mean_trip_length() / params.speed_walk;
    c.served_rate = params.trip_rate();
    c.mean_trip_duration = walk_time;
    c.rider_time_cost = params.value_of_time * walk_time * c.served_rate;
    c.per_rider = c.total_rate() / c.served_rate;
    return c;
}

} // namespace scoot
