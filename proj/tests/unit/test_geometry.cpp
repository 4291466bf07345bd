#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "scoot/geometry.hpp"
#include "scoot/rng.hpp"

using namespace scoot;

TEST_CASE("trip type profile matches the geometric decomposition") {
    const auto p = trip_type_profile(1.0, 3);
    CHECK(p.rate[0] == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
    CHECK(p.rate[1] == doctest::Approx(3.0 / 9.0).epsilon(1e-14));
    CHECK(p.rate[2] == doctest::Approx(5.0 / 9.0).epsilon(1e-14));
    CHECK(p.mean_length[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(p.mean_length[1] == doctest::Approx(14.0 / 9.0).epsilon(1e-14));
    CHECK(p.mean_length[2] == doctest::Approx(38.0 / 15.0).epsilon(1e-14));
    CHECK(p.total_rate() == doctest::Approx(1.0).epsilon(1e-14));

    // Rates always telescope to the total demand; lengths increase.
    for (int lmax : {1, 2, 3, 5, 8}) {
        const auto q = trip_type_profile(2.5, lmax);
        CHECK(q.total_rate() == doctest::Approx(2.5).epsilon(1e-13));
        for (int t = 1; t < lmax; ++t) CHECK(q.mean_length[t] > q.mean_length[t - 1]);
        for (int t = 1; t <= lmax; ++t) {
            CHECK(q.mean_length[t - 1] > t - 1);
            CHECK(q.mean_length[t - 1] <= t);
        }
    }
}

TEST_CASE("mean trip length against a Monte-Carlo of the rectilinear ball") {
    // Independent oracle: uniform destinations in the rectilinear diamond.
    Rng rng(20240811);
    const int samples = 1'200'000;
    double sum = 0.0;
    for (int i = 0; i < samples; ++i) {
        double dx, dy;
        do {
            dx = rng.uniform(-3.0, 3.0);
            dy = rng.uniform(-3.0, 3.0);
        } while (std::abs(dx) + std::abs(dy) > 3.0);
        sum += std::abs(dx) + std::abs(dy);
    }
    const double mc_mean = sum / samples;
    const auto p = trip_type_profile(1.0, 3);
    CHECK(p.mean_trip_length() == doctest::Approx(2.0).epsilon(2e-3));
    CHECK(mc_mean == doctest::Approx(p.mean_trip_length()).epsilon(3e-3));
}

TEST_CASE("sampled trips reproduce the type decomposition") {
    Rng rng(7);
    const double region = 10.0;
    const int samples = 1'000'000;
    long long by_type[4] = {0, 0, 0, 0};
    double len2 = 0.0;
    long long n2 = 0;
    for (int i = 0; i < samples; ++i) {
        // Interior origins avoid the boundary re-draws that skew frequencies.
        SampledTrip t;
        do {
            t = sample_trip(rng, region, 3);
        } while (t.origin.x < 3.0 || t.origin.x > 7.0 || t.origin.y < 3.0 || t.origin.y > 7.0);
        ++by_type[t.type];
        if (t.type == 2) {
            len2 += t.length;
            ++n2;
        }
    }
    CHECK(by_type[1] / static_cast<double>(samples) == doctest::Approx(1.0 / 9.0).epsilon(0.03));
    CHECK(by_type[2] / static_cast<double>(samples) == doctest::Approx(3.0 / 9.0).epsilon(0.01));
    CHECK(by_type[3] / static_cast<double>(samples) == doctest::Approx(5.0 / 9.0).epsilon(0.01));
    CHECK(len2 / n2 == doctest::Approx(14.0 / 9.0).epsilon(0.007));

    Rng rng2(8);
    for (int i = 0; i < 1000; ++i) {
        const SampledTrip t = sample_trip(rng2, region, 1);
        CHECK(t.type == 1);
        CHECK(t.destination.x >= 0.0);
        CHECK(t.destination.x <= region);
    }
}

TEST_CASE("station grid nearest lookup") {
    const StationGrid grid(10, 10.0);
    CHECK(grid.count() == 100);
    CHECK(grid.spacing == doctest::Approx(1.0));

    const auto [idx0, d0] = grid.nearest(grid.center(37));
    CHECK(idx0 == 37);
    CHECK(d0 == doctest::Approx(0.0));

    // Cell corner: rectilinear distance spacing/2 + spacing/2.
    const Vec2 corner{1.0, 1.0};
    const auto [idxc, dc] = grid.nearest(corner);
    CHECK(dc == doctest::Approx(grid.spacing).epsilon(1e-12));
    CHECK(idxc == 0); // lowest index among the four equidistant centers

    Rng rng(99);
    for (int i = 0; i < 20000; ++i) {
        const Vec2 p{rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)};
        const auto [idx, d] = grid.nearest(p);
        CHECK(d <= grid.spacing + 1e-12);
        // Must truly be the arg-min.
        double best = 1e100;
        for (int s = 0; s < grid.count(); ++s) best = std::min(best, rect_distance(p, grid.center(s)));
        CHECK(d == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("nearest-station distance is triangular on [0, S]") {
    const StationGrid grid(10, 10.0);
    Rng rng(4242);
    const int samples = 1'000'000;
    std::vector<double> dist(samples);
    for (int i = 0; i < samples; ++i) {
        const Vec2 p{rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)};
        dist[i] = grid.nearest(p).second;
    }
    std::sort(dist.begin(), dist.end());
    const double s = grid.spacing;
    auto cdf = [&](double x) {
        if (x <= 0.0) return 0.0;
        if (x >= s) return 1.0;
        if (x <= 0.5 * s) return 2.0 * (x / s) * (x / s);
        const double r = 1.0 - x / s;
        return 1.0 - 2.0 * r * r;
    };
    double ks = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double emp_hi = (i + 1.0) / samples;
        const double emp_lo = i / static_cast<double>(samples);
        const double model = cdf(dist[i]);
        ks = std::max(ks, std::max(std::abs(emp_hi - model), std::abs(emp_lo - model)));
    }
    CHECK(ks < 0.005);
}
