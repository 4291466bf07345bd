#include "doctest.h"

#include <cmath>

#include "scoot/core.hpp"
#include "scoot/geometry.hpp"

using namespace scoot;

TEST_CASE("charging profiles sum to the total time") {
    const auto lin = ChargingProfile::linear(8, 8.0);
    CHECK(lin.tau.size() == 8);
    for (double t : lin.tau) CHECK(t == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lin.total() == doctest::Approx(8.0).epsilon(1e-14));

    const auto pw = ChargingProfile::piecewise(8, 8.0);
    CHECK(pw.total() == doctest::Approx(8.0).epsilon(1e-13));
    // Rate halves above 80% capacity: levels 0..5 take 5/6 h, the level
    // crossing the threshold 4/3 h, the top level 5/3 h.
    for (int b = 0; b <= 5; ++b) CHECK(pw.tau[b] == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(pw.tau[6] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(pw.tau[7] == doctest::Approx(5.0 / 3.0).epsilon(1e-12));

    for (int levels : {4, 8, 12, 16}) {
        const auto p = ChargingProfile::piecewise(levels, static_cast<double>(levels));
        CHECK(p.total() == doctest::Approx(static_cast<double>(levels)).epsilon(1e-12));
    }
}

TEST_CASE("priority weight schemes") {
    const auto pw1 = make_priority_weights(PriorityScheme::PW1, 8, 3);
    CHECK(pw1.at(2, 1) == 0.0);
    CHECK(pw1.at(2, 5) == 1.0);

    const auto pw2 = make_priority_weights(PriorityScheme::PW2, 8, 3);
    CHECK(pw2.at(1, 8) == 8.0);
    CHECK(pw2.at(3, 3) == 1.0);

    const auto pw3 = make_priority_weights(PriorityScheme::PW3, 8, 3);
    CHECK(pw3.at(1, 1) == 0.0);
    CHECK(pw3.at(1, 6) == doctest::Approx(1e6));
    CHECK(pw3.at(1, 5) == 5.0);
    CHECK(pw3.at(2, 7) == doctest::Approx(1e6));

    // Zero below the trip type; positive row sums.
    for (auto scheme : {PriorityScheme::PW1, PriorityScheme::PW2, PriorityScheme::PW3}) {
        for (int levels : {8, 12, 16}) {
            const auto w = make_priority_weights(scheme, levels, 3);
            for (int t = 1; t <= 3; ++t) {
                double row = 0.0;
                for (int b = 0; b <= levels; ++b) {
                    if (b < t) CHECK(w.at(t, b) == 0.0);
                    row += w.at(t, b);
                }
                CHECK(row > 0.0);
            }
        }
    }
}

TEST_CASE("trip type of length") {
    CHECK(trip_type_of_length(1.0, 3) == 1);
    CHECK(trip_type_of_length(1.0001, 3) == 2);
    CHECK(trip_type_of_length(2.7, 3) == 3);
    CHECK_THROWS(trip_type_of_length(0.0, 3));
    CHECK_THROWS(trip_type_of_length(3.1, 3));
    // Right-continuous step partition of (0, L].
    for (double l : {0.2, 0.7, 1.5, 2.0, 2.2, 3.0}) {
        const int t = trip_type_of_length(l, 3);
        CHECK(t - 1 < l);
        CHECK(l <= t);
    }
}

namespace {

SystemParams base_params() {
    SystemParams p;
    p.charging = ChargingProfile::piecewise(8, 8.0);
    return p;
}

DesignVariables base_design(const SystemParams& p) {
    DesignVariables d;
    d.grid_dim = 10;
    d.chargers = 20.0;
    d.headway = 1.0;
    d.truck_load = 20.0;
    d.promotions.assign(p.battery_levels, 0.0);
    d.promotions[0] = 1.0;
    d.n_station.assign(p.battery_levels + 1, 5.0);
    d.n_random.assign(p.battery_levels, 50.0);
    d.weights = make_priority_weights(PriorityScheme::PW1, p.battery_levels, p.max_trip_levels);
    return d;
}

bool has_violation(const std::vector<ConstraintViolation>& v, const std::string& id) {
    for (const auto& x : v) {
        if (x.id == id) return true;
    }
    return false;
}

} // namespace

TEST_CASE("validate flags bound violations") {
    const SystemParams p = base_params();
    DesignVariables d = base_design(p);
    CHECK(validate(p, d).empty());

    const double cap = p.value_of_time * (p.region / d.grid_dim) / p.speed_walk;
    DesignVariables over_promo = d;
    over_promo.promotions[0] = cap + 0.01;
    CHECK(has_violation(validate(p, over_promo), "promotion-cap"));

    DesignVariables over_cap = d;
    over_cap.n_station.assign(p.battery_levels + 1, 0.0);
    over_cap.n_station[0] = 100.0 * 20.0 + 1.0; // one above K^2 Q
    CHECK(has_violation(validate(p, over_cap), "station-capacity"));

    DesignVariables negative = d;
    negative.n_random[2] = -1.0;
    CHECK(has_violation(validate(p, negative), "nonnegative"));

    DesignVariables frac_q = d;
    frac_q.chargers = 7.5;
    CHECK(has_violation(validate(p, frac_q), "integer-domain"));
}
