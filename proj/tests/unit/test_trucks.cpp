#include "doctest.h"

#include <vector>

#include "scoot/trucks.hpp"

using namespace scoot;

TEST_CASE("capacity clustering respects the bound") {
    Rng rng(11);
    std::vector<Vec2> points;
    for (int i = 0; i < 57; ++i) {
        points.push_back({rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)});
    }
    const int clusters = 3;
    const int capacity = 20;
    RoutePlannerConfig cfg;
    const auto assign = capacity_clusters(points, clusters, capacity, rng, cfg);
    std::vector<int> load(clusters, 0);
    for (int c : assign) {
        REQUIRE(c >= 0);
        REQUIRE(c < clusters);
        ++load[c];
    }
    for (int l : load) CHECK(l <= capacity);
}

TEST_CASE("annealed tour never beats nearest neighbour the wrong way") {
    Rng rng(12);
    const Vec2 depot{5.0, -20.0};
    RoutePlannerConfig cfg;
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 4 + static_cast<int>(rng.uniform_index(36));
        std::vector<Vec2> pts;
        for (int i = 0; i < n; ++i) pts.push_back({rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)});
        // Nearest-neighbour baseline, reconstructed independently.
        std::vector<char> used(n, 0);
        std::vector<int> nn_order;
        Vec2 cur = depot;
        for (int s = 0; s < n; ++s) {
            int best = -1;
            double best_d = 1e300;
            for (int i = 0; i < n; ++i) {
                if (used[i]) continue;
                const double d = rect_distance(cur, pts[i]);
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            used[best] = 1;
            nn_order.push_back(best);
            cur = pts[best];
        }
        const double nn_len = tour_length(depot, pts, nn_order);
        const auto order = anneal_tour(depot, pts, rng, cfg);
        REQUIRE(order.size() == pts.size());
        std::vector<char> seen(n, 0);
        for (int idx : order) {
            REQUIRE(!seen[idx]);
            seen[idx] = 1;
        }
        CHECK(tour_length(depot, pts, order) <= nn_len + 1e-9);
    }
}

TEST_CASE("dispatch plan covers every stop exactly once") {
    Rng rng(13);
    std::vector<TruckStop> drops, picks;
    for (int i = 0; i < 41; ++i) {
        drops.push_back({{rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)}, true, i});
    }
    for (int i = 0; i < 17; ++i) {
        picks.push_back({{rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)}, false, 100 + i});
    }
    const Vec2 depot{5.0, -20.0};
    const auto plan = plan_dispatch(depot, drops, picks, 3, 20, rng);
    REQUIRE(plan.routes.size() == 3);
    std::vector<int> seen;
    int drop_count = 0;
    for (const auto& route : plan.routes) {
        int route_drops = 0;
        for (const auto& stop : route.stops) {
            seen.push_back(stop.payload);
            if (stop.is_dropoff) {
                ++route_drops;
                ++drop_count;
            }
        }
        CHECK(route_drops <= 20);
        CHECK(route.length >= 2.0 * 20.0 - 1e-9); // at least out and back
    }
    CHECK(drop_count == 41);
    CHECK(seen.size() == 58);
    CHECK(plan.total_length > 0.0);
}
