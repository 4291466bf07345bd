#include "doctest.h"

#include <cmath>

#include "scoot/rng.hpp"
#include "scoot/solver.hpp"
#include "scoot/verify.hpp"

using namespace scoot;

namespace {

SystemParams table_params(double demand = 1.0) {
    SystemParams p;
    p.demand = demand;
    p.charging = ChargingProfile::piecewise(8, 8.0);
    return p;
}

FlowRates empty_flow(int levels, int types) {
    FlowRates f;
    f.battery_levels = levels;
    f.max_trip_levels = types;
    const std::size_t cells = static_cast<std::size_t>(levels + 1) * types;
    f.book_station.assign(cells, 0.0);
    f.book_random.assign(cells, 0.0);
    f.drop_station.assign(cells, 0.0);
    f.drop_random.assign(cells, 0.0);
    f.book_station_total.assign(levels + 1, 0.0);
    f.book_random_total.assign(levels + 1, 0.0);
    f.pickup.assign(levels + 1, 0.0);
    f.charge.assign(levels, 0.0);
    return f;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

TEST_CASE("conservation residuals: zero flow and a hand-built balanced toy") {
    CHECK(max_abs(conservation_residuals(empty_flow(8, 3))) == 0.0);

    // Two battery levels, unit trips only; flows chosen by hand to balance
    // every node of the network.
    FlowRates f = empty_flow(2, 1);
    f.at(f.book_station, 1, 1) = 2.0;
    f.at(f.book_station, 2, 1) = 3.0;
    f.at(f.book_random, 1, 1) = 6.0;
    f.at(f.book_random, 2, 1) = 6.0;
    f.book_station_total = {0.0, 2.0, 3.0};
    f.book_random_total = {0.0, 6.0, 6.0};
    f.pickup = {0.0, 8.0, 9.0};
    f.at(f.drop_station, 1, 1) = 2.0;
    f.at(f.drop_random, 1, 1) = 6.0;
    f.at(f.drop_station, 2, 1) = 3.0;
    f.at(f.drop_random, 2, 1) = 6.0;
    f.charge = {2.0, 3.0};
    f.collect = 6.0;
    f.distribute = 6.0;
    f.depot_charge = 6.0;
    const auto r = conservation_residuals(f);
    REQUIRE(r.size() == 6); // 2B + 2
    CHECK(max_abs(r) < 1e-12);
}

TEST_CASE("conservation residuals telescope to zero for any consistent flow") {
    // Drop-offs split bookings pairwise and the distribute rate equals the
    // full-SoC random booking rate; everything else is arbitrary.
    Rng rng(910);
    for (int trial = 0; trial < 50; ++trial) {
        const int levels = 3 + static_cast<int>(rng.uniform_index(6));
        const int types = 1 + static_cast<int>(rng.uniform_index(
                                   static_cast<std::uint64_t>(std::min(3, levels))));
        FlowRates f = empty_flow(levels, types);
        for (int t = 1; t <= types; ++t) {
            for (int b = t; b <= levels; ++b) {
                const double as = rng.uniform() * 10.0;
                const double ar = rng.uniform() * 10.0;
                const double frac = rng.uniform();
                f.at(f.book_station, b, t) = as;
                f.at(f.book_random, b, t) = ar;
                f.at(f.drop_station, b, t) = frac * (as + ar);
                f.at(f.drop_random, b, t) = (1.0 - frac) * (as + ar);
            }
        }
        for (int b = 0; b <= levels; ++b) {
            double s = 0.0, r2 = 0.0;
            for (int t = 1; t <= std::min(types, b); ++t) {
                s += f.at(f.book_station, b, t);
                r2 += f.at(f.book_random, b, t);
            }
            f.book_station_total[b] = s;
            f.book_random_total[b] = r2;
            f.pickup[b] = s + r2;
        }
        for (int b = 0; b < levels; ++b) f.charge[b] = rng.uniform() * 5.0;
        f.collect = rng.uniform() * 5.0;
        f.distribute = f.book_random_total[levels];
        double sum = 0.0;
        for (double r3 : conservation_residuals(f)) sum += r3;
        CHECK(std::abs(sum) < 1e-11);
    }
}

TEST_CASE("compute_rates: demand partition and drop-off structure") {
    const SystemParams params = table_params();
    DesignVariables d = verification_design(params, 10);
    d.n_station.assign(9, 12.0);
    d.n_random.assign(8, 80.0);
    const FlowRates f = compute_rates(params, d);
    const TripTypeProfile profile = trip_type_profile(params.demand, params.max_trip_levels);
    for (int t = 1; t <= 3; ++t) {
        double sum = 0.0;
        for (int b = t; b <= 8; ++b) sum += f.at(f.book_station, b, t) + f.at(f.book_random, b, t);
        const double expect = profile.rate[t - 1] * params.area();
        CHECK(std::abs(sum - expect) <= 1e-12 * std::max(1.0, expect));
    }

    // No promotions: every drop-off happens at a random location.
    DesignVariables d0 = d;
    d0.promotions.assign(8, 0.0);
    const FlowRates f0 = compute_rates(params, d0);
    for (int t = 1; t <= 3; ++t) {
        for (int b = t; b <= 8; ++b) {
            CHECK(f0.at(f0.drop_station, b, t) == 0.0);
            CHECK(f0.at(f0.drop_random, b, t) ==
                  doctest::Approx(f0.at(f0.book_station, b, t) + f0.at(f0.book_random, b, t))
                      .epsilon(1e-14));
        }
    }

    // Uniform weights split station bookings proportionally to class counts.
    DesignVariables d2 = d;
    d2.n_station.assign(9, 0.0);
    d2.n_station[5] = 10.0;
    d2.n_station[6] = 30.0;
    const FlowRates f2 = compute_rates(params, d2);
    CHECK(f2.at(f2.book_station, 6, 1) ==
          doctest::Approx(3.0 * f2.at(f2.book_station, 5, 1)).epsilon(1e-12));
}

TEST_CASE("priority-weight rows are scale invariant") {
    const SystemParams params = table_params();
    DesignVariables d = verification_design(params, 10);
    d.n_station.assign(9, 7.0);
    d.n_random.assign(8, 60.0);
    const FlowRates base = compute_rates(params, d);
    DesignVariables scaled = d;
    for (int t = 1; t <= 3; ++t) {
        for (int b = 0; b <= 8; ++b) scaled.weights.at(t, b) *= 1e3;
    }
    const FlowRates f2 = compute_rates(params, scaled);
    auto close = [](double a, double b) {
        return std::abs(a - b) <= 1e-10 * std::max({1.0, std::abs(a), std::abs(b)});
    };
    for (std::size_t i = 0; i < base.book_station.size(); ++i) {
        CHECK(close(base.book_station[i], f2.book_station[i]));
        CHECK(close(base.book_random[i], f2.book_random[i]));
        CHECK(close(base.drop_station[i], f2.drop_station[i]));
        CHECK(close(base.drop_random[i], f2.drop_random[i]));
    }
    for (int b = 0; b < 8; ++b) CHECK(close(base.charge[b], f2.charge[b]));
    CHECK(close(base.collect, f2.collect));
    CHECK(close(base.distribute, f2.distribute));
}

TEST_CASE("close_fleet: truck plan arithmetic") {
    SystemParams params = table_params();
    DesignVariables d = verification_design(params, 10);
    FlowRates f = empty_flow(8, 3);
    f.collect = 20.0;
    f.distribute = 20.0;
    f.depot_charge = 20.0;
    const SteadyState st = close_fleet(params, d, f);
    CHECK(st.trucks_per_headway == doctest::Approx(1.0));
    CHECK(st.route_length == doctest::Approx(40.0 + 0.95 * std::sqrt(4000.0)).epsilon(1e-12));
    CHECK(st.n_depot_charging == doctest::Approx(8.0 * 20.0).epsilon(1e-12));
    CHECK(st.n_depot_ready == doctest::Approx(10.0).epsilon(1e-12));

    const SteadyState idle = close_fleet(params, d, empty_flow(8, 3));
    CHECK(idle.n_random[0] == 0.0);
    CHECK(idle.n_truck_empty == 0.0);
    CHECK(idle.n_truck_full == 0.0);
    CHECK(idle.n_depot_charging == 0.0);
    CHECK(idle.n_depot_ready == 0.0);
    CHECK(idle.route_length == 0.0);
}

TEST_CASE("two-level depot-only chain solves to the closed form") {
    SystemParams p;
    p.demand = 0.05;
    p.battery_levels = 2;
    p.max_trip_levels = 1;
    p.charging = ChargingProfile::linear(2, 2.0);
    DesignVariables d;
    d.grid_dim = 0;
    d.chargers = 0.0;
    d.headway = 1.0;
    d.truck_load = 20.0;
    d.promotions.assign(2, 0.0);
    d.weights = make_priority_weights(PriorityScheme::PW1, 2, 1);

    const SteadyState st = solve_steady_state(p, d, FixTotal::Random, 100.0);
    // Unit-length trips book SoC-1 and SoC-2 vehicles in proportion to their
    // counts, and the SoC-1 balance forces the two classes equal.
    CHECK(st.n_random[1] == doctest::Approx(50.0).epsilon(1e-10));
    CHECK(st.n_random[2] == doctest::Approx(50.0).epsilon(1e-10));
    CHECK(st.residual_inf <= 1e-9);
    const double rate = p.trip_rate();
    CHECK(st.flow.collect == doctest::Approx(rate / 2.0).epsilon(1e-9));
    CHECK(st.flow.distribute == doctest::Approx(rate / 2.0).epsilon(1e-9));
}

TEST_CASE("base verification cell solves with tight conservation") {
    const SystemParams params = table_params();
    const DesignVariables d = verification_design(params, 10);
    const SteadyState st = solve_steady_state(params, d, FixTotal::Random, 1000.0);
    CHECK(st.residual_inf <= 1e-9);
    CHECK(st.random_total() == doctest::Approx(1000.0).epsilon(1e-9));

    // Steady-state identities of the network.
    const auto& f = st.flow;
    CHECK(std::abs(f.collect - f.distribute) <= 1e-9);
    CHECK(std::abs(f.depot_charge - f.collect) <= 1e-12);
    CHECK(std::abs(f.book_station_total[8] - f.charge[7]) <= 1e-9);
    CHECK(std::abs(f.charge[0] - f.station_drop_inflow(0)) <= 1e-9);
    // SoC-0 station dwell is exactly one charge level.
    CHECK(st.n_station[0] ==
          doctest::Approx(params.charging.tau[0] * f.charge[0]).epsilon(1e-8));
    // Total bookings equal total demand.
    CHECK(f.total_bookings() == doctest::Approx(params.trip_rate()).epsilon(1e-12));

    // Duration is the demand-weighted walk plus ride time.
    CHECK(st.mean_trip_duration > 0.1);
    CHECK(st.mean_trip_duration < 0.5);
    CHECK(st.fleet > 1000.0);
}

TEST_CASE("warm start reproduces the same root") {
    const SystemParams params = table_params();
    const DesignVariables d = verification_design(params, 15);
    const SteadyState a = solve_steady_state(params, d, FixTotal::Random, 2000.0);
    SolveOptions opt;
    opt.warm_start = pack_unknowns(a, d.grid_dim);
    const SteadyState b = solve_steady_state(params, d, FixTotal::Random, 2000.0, opt);
    for (int soc = 0; soc <= 8; ++soc) {
        CHECK(b.n_station[soc] == doctest::Approx(a.n_station[soc]).epsilon(1e-6));
        CHECK(b.n_random[soc] == doctest::Approx(a.n_random[soc]).epsilon(1e-6));
    }
}
