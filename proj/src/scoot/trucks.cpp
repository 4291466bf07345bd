#include "scoot/trucks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "scoot/rectdist.hpp"

namespace scoot {

namespace {

std::vector<Vec2> pick_initial_centers(const std::vector<Vec2>& points, int clusters, Rng& rng) {
    // Farthest-point seeding from a random start: spreads centers without the
    // distance-weighted sampling machinery of k-means++.
    std::vector<Vec2> centers;
    centers.push_back(points[rng.uniform_index(points.size())]);
    std::vector<double> dist(points.size(), 0.0);
    while (static_cast<int>(centers.size()) < clusters) {
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            double d = std::numeric_limits<double>::infinity();
            for (const auto& c : centers) d = std::min(d, rect_distance(points[i], c));
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        centers.push_back(points[far]);
    }
    return centers;
}

double coord_median(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

std::vector<int> capacity_clusters(const std::vector<Vec2>& points, int clusters, int capacity,
                                   Rng& rng, const RoutePlannerConfig& cfg,
                                   std::vector<Vec2>* centers_out) {
    const int n = static_cast<int>(points.size());
    std::vector<int> assign(n, 0);
    if (n == 0 || clusters <= 1) {
        if (centers_out) centers_out->assign(std::max(clusters, 1), n ? points[0] : Vec2{});
        return assign;
    }
    std::vector<Vec2> centers = pick_initial_centers(points, clusters, rng);
    std::vector<double> cx(clusters), cy(clusters);

    for (int round = 0; round < cfg.kmeans_iterations; ++round) {
        for (int c = 0; c < clusters; ++c) {
            cx[c] = centers[c].x;
            cy[c] = centers[c].y;
        }
        // Assign in order of regret (gap between best and second-best center)
        // so contested points claim capacity first.
        std::vector<std::vector<double>> dist(n, std::vector<double>(clusters));
        std::vector<double> regret(n);
        for (int i = 0; i < n; ++i) {
            rect_distances(cx.data(), cy.data(), clusters, points[i].x, points[i].y, dist[i].data());
            double best = std::numeric_limits<double>::infinity();
            double second = best;
            for (double d : dist[i]) {
                if (d < best) {
                    second = best;
                    best = d;
                } else if (d < second) {
                    second = d;
                }
            }
            regret[i] = (clusters > 1 ? second - best : 0.0);
        }
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (regret[a] != regret[b]) return regret[a] > regret[b];
            return a < b;
        });
        std::vector<int> load(clusters, 0);
        std::vector<int> next(n, -1);
        for (int idx : order) {
            int best_c = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < clusters; ++c) {
                if (load[c] >= capacity) continue;
                if (dist[idx][c] < best_d) {
                    best_d = dist[idx][c];
                    best_c = c;
                }
            }
            if (best_c < 0) best_c = 0; // only when capacity * clusters < n
            next[idx] = best_c;
            ++load[best_c];
        }
        const bool stable = std::equal(next.begin(), next.end(), assign.begin());
        assign = std::move(next);
        // Recenter on coordinate-wise medians (rectilinear 1-median per axis).
        bool any_moved = false;
        for (int c = 0; c < clusters; ++c) {
            std::vector<double> xs, ys;
            for (int i = 0; i < n; ++i) {
                if (assign[i] == c) {
                    xs.push_back(points[i].x);
                    ys.push_back(points[i].y);
                }
            }
            if (xs.empty()) continue;
            const Vec2 updated{coord_median(xs), coord_median(ys)};
            if (rect_distance(updated, centers[c]) > 1e-12) any_moved = true;
            centers[c] = updated;
        }
        if (stable && !any_moved) break;
    }
    if (centers_out) *centers_out = centers;
    return assign;
}

double tour_length(const Vec2& depot, const std::vector<Vec2>& pts, const std::vector<int>& order) {
    double len = 0.0;
    Vec2 prev = depot;
    for (int idx : order) {
        len += rect_distance(prev, pts[idx]);
        prev = pts[idx];
    }
    len += rect_distance(prev, depot);
    return len;
}

namespace {

std::vector<int> nearest_neighbour_tour(const Vec2& depot, const std::vector<Vec2>& pts) {
    const int n = static_cast<int>(pts.size());
    std::vector<int> order;
    order.reserve(n);
    std::vector<char> used(n, 0);
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
        xs[i] = pts[i].x;
        ys[i] = pts[i].y;
    }
    Vec2 cur = depot;
    for (int step = 0; step < n; ++step) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            if (used[i]) continue;
            const double d = std::fabs(xs[i] - cur.x) + std::fabs(ys[i] - cur.y);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        used[best] = 1;
        order.push_back(best);
        cur = pts[best];
    }
    return order;
}

} // namespace

std::vector<int> anneal_tour(const Vec2& depot, const std::vector<Vec2>& pts, Rng& rng,
                             const RoutePlannerConfig& cfg) {
    const int n = static_cast<int>(pts.size());
    std::vector<int> order = nearest_neighbour_tour(depot, pts);
    if (n < 4) return order;

    auto point_at = [&](const std::vector<int>& ord, int pos) -> const Vec2& {
        return pts[ord[pos]];
    };
    double len = tour_length(depot, pts, order);
    std::vector<int> best = order;
    double best_len = len;

    const int iters = std::min(cfg.anneal_iteration_cap, cfg.anneal_iterations_per_stop * n);
    double temp = std::max(1e-9, best_len / (2.0 * n));
    for (int it = 0; it < iters; ++it) {
        // 2-opt: reverse the segment (i..j).
        const int i = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - 1)));
        const int j = i + 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - 1 - i)));
        const Vec2& a = (i == 0) ? depot : point_at(order, i - 1);
        const Vec2& b = point_at(order, i);
        const Vec2& c = point_at(order, j);
        const Vec2 d = (j == n - 1) ? depot : point_at(order, j + 1);
        const double delta = rect_distance(a, c) + rect_distance(b, d) -
                             rect_distance(a, b) - rect_distance(c, d);
        if (delta <= 0.0 || rng.uniform() < std::exp(-delta / temp)) {
            std::reverse(order.begin() + i, order.begin() + j + 1);
            len += delta;
            if (len < best_len) {
                best_len = len;
                best = order;
            }
        }
        temp *= cfg.anneal_cooling;
    }
    return best;
}

DispatchPlan plan_dispatch(const Vec2& depot, const std::vector<TruckStop>& dropoffs,
                           const std::vector<TruckStop>& pickups, int trucks, int capacity,
                           Rng& rng, const RoutePlannerConfig& cfg) {
    DispatchPlan plan;
    if (trucks <= 0) return plan;
    plan.routes.resize(trucks);

    std::vector<Vec2> drop_pts(dropoffs.size());
    for (std::size_t i = 0; i < dropoffs.size(); ++i) drop_pts[i] = dropoffs[i].pos;
    std::vector<Vec2> centers;
    std::vector<int> drop_assign;
    if (!drop_pts.empty()) {
        drop_assign = capacity_clusters(drop_pts, trucks, capacity, rng, cfg, &centers);
    } else {
        // No outbound load: cluster the pickups themselves (inbound load is
        // unconstrained).
        std::vector<Vec2> pick_pts(pickups.size());
        for (std::size_t i = 0; i < pickups.size(); ++i) pick_pts[i] = pickups[i].pos;
        std::vector<int> pa = capacity_clusters(pick_pts, trucks,
                                                static_cast<int>(pick_pts.size()) + 1, rng, cfg,
                                                &centers);
        std::vector<std::vector<TruckStop>> grouped(trucks);
        for (std::size_t i = 0; i < pickups.size(); ++i) grouped[pa[i]].push_back(pickups[i]);
        for (int t = 0; t < trucks; ++t) {
            std::vector<Vec2> pts;
            for (const auto& s : grouped[t]) pts.push_back(s.pos);
            const auto order = anneal_tour(depot, pts, rng, cfg);
            for (int idx : order) plan.routes[t].stops.push_back(grouped[t][idx]);
            plan.routes[t].length = tour_length(depot, pts, order);
            plan.total_length += plan.routes[t].length;
        }
        return plan;
    }

    std::vector<std::vector<TruckStop>> grouped(trucks);
    for (std::size_t i = 0; i < dropoffs.size(); ++i) grouped[drop_assign[i]].push_back(dropoffs[i]);
    if (!pickups.empty()) {
        std::vector<double> cxs(centers.size()), cys(centers.size());
        for (std::size_t c = 0; c < centers.size(); ++c) {
            cxs[c] = centers[c].x;
            cys[c] = centers[c].y;
        }
        for (const auto& p : pickups) {
            const RectArgmin nearest = rect_argmin(cxs.data(), cys.data(), centers.size(), p.pos.x,
                                                   p.pos.y);
            grouped[nearest.index >= 0 ? nearest.index : 0].push_back(p);
        }
    }
    for (int t = 0; t < trucks; ++t) {
        std::vector<Vec2> pts;
        for (const auto& s : grouped[t]) pts.push_back(s.pos);
        const auto order = anneal_tour(depot, pts, rng, cfg);
        for (int idx : order) plan.routes[t].stops.push_back(grouped[t][idx]);
        plan.routes[t].length = tour_length(depot, pts, order);
        plan.total_length += plan.routes[t].length;
    }
    return plan;
}

} // namespace scoot
