#pragma once

#include <vector>

#include "scoot/geometry.hpp"
#include "scoot/rng.hpp"

namespace scoot {

// Cluster-first route-second planning for one repositioning dispatch.
// Drop-off points are clustered with a capacity bound (at most `capacity` per
// cluster); pickup points join the cluster of their nearest center and do not
// count against the bound. Each cluster is served by one truck on a
// depot-anchored rectilinear tour ordered by simulated annealing.

struct TruckStop {
    Vec2 pos;
    bool is_dropoff = false;
    int payload = -1; // caller-side id of the vehicle dropped or collected
};

struct TruckRoute {
    std::vector<TruckStop> stops; // visit order, depot excluded
    double length = 0.0;          // depot -> stops -> depot, rectilinear
};

struct DispatchPlan {
    std::vector<TruckRoute> routes;
    double total_length = 0.0;
};

struct RoutePlannerConfig {
    int kmeans_iterations = 24;
    int anneal_iterations_per_stop = 220;
    int anneal_iteration_cap = 24000;
    double anneal_cooling = 0.995;
};

// Capacity-bounded assignment of points to `clusters` centers. Returns the
// cluster index per point. Greedy regret-based assignment refined by Lloyd
// rounds with coordinate-wise medians; deterministic given the rng state.
std::vector<int> capacity_clusters(const std::vector<Vec2>& points, int clusters, int capacity,
                                   Rng& rng, const RoutePlannerConfig& cfg,
                                   std::vector<Vec2>* centers_out = nullptr);

// Tour length of depot -> order -> depot.
double tour_length(const Vec2& depot, const std::vector<Vec2>& pts, const std::vector<int>& order);

// Nearest-neighbour construction followed by simulated annealing with 2-opt
// moves; never worse than the nearest-neighbour tour.
std::vector<int> anneal_tour(const Vec2& depot, const std::vector<Vec2>& pts, Rng& rng,
                             const RoutePlannerConfig& cfg);

DispatchPlan plan_dispatch(const Vec2& depot, const std::vector<TruckStop>& dropoffs,
                           const std::vector<TruckStop>& pickups, int trucks, int capacity,
                           Rng& rng, const RoutePlannerConfig& cfg = RoutePlannerConfig{});

} // namespace scoot
