#include "doctest.h"

#include <cmath>

#include "scoot/cost.hpp"
#include "scoot/verify.hpp"

using namespace scoot;

namespace {

SystemParams table_params(double demand = 1.0) {
    SystemParams p;
    p.demand = demand;
    p.charging = ChargingProfile::piecewise(8, 8.0);
    return p;
}

} // namespace

TEST_CASE("walk-only benchmark") {
    const SystemParams p = table_params();
    const CostBreakdown c = benchmark_walk_only(p);
    CHECK(c.per_rider == doctest::Approx(40.0 / 3.0).epsilon(1e-12));
    CHECK(c.station_cost == 0.0);
    CHECK(c.fleet_cost == 0.0);
    CHECK(c.promotion_cost == 0.0);

    SystemParams doubled = p;
    doubled.value_of_time *= 2.0;
    CHECK(benchmark_walk_only(doubled).per_rider == doctest::Approx(80.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("zero-flow state carries only standing costs") {
    const SystemParams p = table_params();
    DesignVariables d = verification_design(p, 10);
    d.n_station.assign(9, 10.0);
    d.n_random.assign(8, 25.0);
    FlowRates f;
    f.battery_levels = 8;
    f.max_trip_levels = 3;
    const std::size_t cells = 9 * 3;
    f.book_station.assign(cells, 0.0);
    f.book_random.assign(cells, 0.0);
    f.drop_station.assign(cells, 0.0);
    f.drop_random.assign(cells, 0.0);
    f.book_station_total.assign(9, 0.0);
    f.book_random_total.assign(9, 0.0);
    f.pickup.assign(9, 0.0);
    f.charge.assign(8, 0.0);
    const SteadyState st = close_fleet(p, d, f);
    const CostBreakdown c = cost_breakdown(p, st, d);
    const double expected =
        (p.cost_station * 100.0 + p.cost_charger * 100.0 * 20.0 + p.cost_scooter * st.fleet) /
        p.trip_rate();
    CHECK(c.per_rider == doctest::Approx(expected).epsilon(1e-12));
    CHECK(c.mean_trip_duration == 0.0);
}

TEST_CASE("promotion cost is the payout rate weighted by post-trip SoC") {
    const SystemParams p = table_params();
    DesignVariables d = verification_design(p, 10);
    d.promotions.assign(8, 0.0);
    d.promotions[0] = 2.5;
    FlowRates f;
    f.battery_levels = 8;
    f.max_trip_levels = 3;
    const std::size_t cells = 9 * 3;
    f.book_station.assign(cells, 0.0);
    f.book_random.assign(cells, 0.0);
    f.drop_station.assign(cells, 0.0);
    f.drop_random.assign(cells, 0.0);
    f.book_station_total.assign(9, 0.0);
    f.book_random_total.assign(9, 0.0);
    f.pickup.assign(9, 0.0);
    f.charge.assign(8, 0.0);
    // 10 drop-offs per tu into SoC 0 at stations, from unit-length trips on
    // SoC-1 vehicles.
    f.at(f.drop_station, 1, 1) = 10.0;
    f.charge[0] = 10.0; // keep the toy balanced at the SoC-0 node
    const SteadyState st = close_fleet(p, d, f);
    const CostBreakdown c = cost_breakdown(p, st, d);
    CHECK(c.promotion_cost == doctest::Approx(25.0).epsilon(1e-12));
}

TEST_CASE("cost identity holds at a solved state") {
    const SystemParams p = table_params();
    const DesignVariables d = verification_design(p, 10);
    const SteadyState st = solve_steady_state(p, d, FixTotal::Random, 800.0);
    DesignVariables solved = d;
    solved.n_station = st.n_station;
    solved.n_random.assign(st.n_random.begin() + 1, st.n_random.end());
    const CostBreakdown c = cost_breakdown(p, st, solved);
    CHECK(c.per_rider * c.served_rate ==
          doctest::Approx(c.total_rate()).epsilon(1e-9));
    CHECK(c.mean_trip_duration == doctest::Approx(st.mean_trip_duration).epsilon(1e-12));
    CHECK(c.per_rider > 0.0);
}
