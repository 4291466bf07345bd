#include "scoot/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <limits>

#include "scoot/quadrature.hpp"

namespace scoot {

namespace {

std::uint64_t key_of(double v) {
    std::uint64_t k;
    std::memcpy(&k, &v, sizeof(k));
    return k;
}

double lookup(std::vector<std::pair<std::uint64_t, double>>& table, double n,
              double (*fn)(double, int, double), int grid_dim, double region) {
    const std::uint64_t k = key_of(n);
    for (const auto& [key, val] : table) {
        if (key == k) return val;
    }
    const double v = fn(n, grid_dim, region);
    if (table.size() > 512) table.clear();
    table.emplace_back(k, v);
    return v;
}

} // namespace

double KernelCache::get_c2(double n, int grid_dim, double region) {
    return lookup(c2_, n, &p_c2, grid_dim, region);
}

double KernelCache::get_pickup(double n, int grid_dim, double region) {
    return lookup(pickup_, n, &expected_pickup_conditional, grid_dim, region);
}

double FlowRates::station_drop_inflow(int soc) const {
    double s = 0.0;
    for (int t = 1; t <= max_trip_levels; ++t) {
        if (soc + t <= battery_levels) s += at(drop_station, soc + t, t);
    }
    return s;
}

double FlowRates::random_drop_inflow(int soc) const {
    double s = 0.0;
    for (int t = 1; t <= max_trip_levels; ++t) {
        if (soc + t <= battery_levels) s += at(drop_random, soc + t, t);
    }
    return s;
}

double FlowRates::total_bookings() const {
    double s = 0.0;
    for (int b = 0; b <= battery_levels; ++b) {
        s += book_station_total[b] + book_random_total[b];
    }
    return s;
}

RateContext evaluate_rates(const SystemParams& params, const DesignVariables& design,
                           const std::vector<double>& n_station,
                           const std::vector<double>& n_random, KernelCache* cache) {
    const int levels = params.battery_levels;
    const int types = params.max_trip_levels;
    const int k = design.grid_dim;
    const double area = params.area();

    RateContext ctx;
    ctx.profile = trip_type_profile(params.demand, types);
    auto& f = ctx.flow;
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

    ctx.cond_c1.assign(types + 1, 0.0);
    ctx.cond_c2.assign(types + 1, 1.0);
    ctx.station_prob.assign(types + 1, 0.0);
    ctx.pickup_distance.assign(types + 1, 0.0);
    ctx.accept_prob.assign(levels, 0.0);
    ctx.station_intensity.assign(levels + 1, 0.0);

    double station_mass = 0.0;
    for (double v : n_station) station_mass += v;

    const auto& pw = design.weights;
    KernelCache local_cache;
    KernelCache* kc = cache ? cache : &local_cache;

    for (int t = 1; t <= types; ++t) {
        const double demand_t = ctx.profile.rate[t - 1] * area;
        if (!(demand_t > 0.0)) continue;

        double weighted = 0.0;
        double suitable_station = 0.0;
        for (int b = t; b <= levels; ++b) {
            const double w = pw.at(t, b);
            if (w > 0.0) {
                weighted += w * n_station[b];
                suitable_station += n_station[b];
            }
        }
        double suitable_random = 0.0;
        for (int b = t; b <= levels; ++b) suitable_random += n_random[b];
        if (!(suitable_random > 0.0)) {
            throw NoSupplyError("evaluate_rates: no suitable randomly-located supply for trip type " +
                                std::to_string(t));
        }

        double c1 = 0.0;
        double c2 = 1.0;
        double prob_station = 0.0;
        if (k > 0 && weighted > 0.0) {
            c1 = p_c1(station_mass, suitable_station, k, design.chargers);
            c2 = kc->get_c2(suitable_random, k, params.region);
            prob_station = c1 * c2;
        }
        ctx.cond_c1[t] = c1;
        ctx.cond_c2[t] = c2;
        ctx.station_prob[t] = prob_station;

        for (int b = t; b <= levels; ++b) {
            if (prob_station > 0.0 && weighted > 0.0) {
                f.at(f.book_station, b, t) =
                    prob_station * (pw.at(t, b) * n_station[b] / weighted) * demand_t;
                // booking rate per vehicle of the class; finite at zero counts
                ctx.station_intensity[b] += prob_station * pw.at(t, b) * demand_t / weighted;
            }
            f.at(f.book_random, b, t) =
                (1.0 - prob_station) * (n_random[b] / suitable_random) * demand_t;
        }

        const double random_only = 0.63 * params.region / std::sqrt(suitable_random);
        const double c1_used = (k > 0 && weighted > 0.0) ? c1 : 0.0;
        double conditional = 0.0;
        if (c1_used > 0.0) conditional = kc->get_pickup(suitable_random, k, params.region);
        ctx.pickup_distance[t] = c1_used * conditional + (1.0 - c1_used) * random_only;
    }

    for (int b = 0; b <= levels; ++b) {
        double s = 0.0;
        double r = 0.0;
        for (int t = 1; t <= std::min(types, b); ++t) {
            s += f.at(f.book_station, b, t);
            r += f.at(f.book_random, b, t);
        }
        f.book_station_total[b] = s;
        f.book_random_total[b] = r;
        f.pickup[b] = s + r;
    }

    double vacancy = 0.0;
    if (k > 0) vacancy = p_q(station_mass, k, design.chargers);
    ctx.vacancy_prob = vacancy;
    const double spacing = design.station_spacing(params.region);
    for (int j = 0; j < levels; ++j) {
        const double promo =
            j < static_cast<int>(design.promotions.size()) ? design.promotions[j] : 0.0;
        ctx.accept_prob[j] =
            (k > 0) ? p_pi(promo, params.value_of_time, spacing, params.speed_walk) : 0.0;
    }

    for (int t = 1; t <= types; ++t) {
        for (int b = t; b <= levels; ++b) {
            const double total = f.at(f.book_station, b, t) + f.at(f.book_random, b, t);
            const double to_station = vacancy * ctx.accept_prob[b - t] * total;
            f.at(f.drop_station, b, t) = to_station;
            f.at(f.drop_random, b, t) = total - to_station;
        }
    }

    // Station charging ladder. A vehicle finishes its current level only if no
    // booking interrupts it; booking arrivals are Poisson at the per-vehicle
    // intensity, which the booking split defines independently of the class
    // count (so empty classes still charge at finite speed rather than
    // flowing through instantaneously).
    const auto& tau = params.charging.tau;
    double below = 0.0;
    for (int b = 0; b < levels; ++b) {
        const double inflow = f.station_drop_inflow(b) + below;
        f.charge[b] = inflow * std::exp(-ctx.station_intensity[b] * tau[b]);
        below = f.charge[b];
    }

    f.collect = f.random_drop_inflow(0);
    f.distribute = f.book_random_total[levels];
    f.depot_charge = f.collect;
    return ctx;
}

FlowRates compute_rates(const SystemParams& params, const DesignVariables& design) {
    std::vector<double> n_s = design.n_station;
    n_s.resize(params.battery_levels + 1, 0.0);
    std::vector<double> n_r(params.battery_levels + 1, 0.0);
    for (std::size_t i = 0; i < design.n_random.size() && i + 1 <= static_cast<std::size_t>(params.battery_levels); ++i) {
        n_r[i + 1] = design.n_random[i];
    }
    return evaluate_rates(params, design, n_s, n_r).flow;
}

std::vector<double> conservation_residuals(const FlowRates& flow) {
    const int levels = flow.battery_levels;
    std::vector<double> r(2 * levels + 2, 0.0);
    for (int b = 1; b <= levels - 1; ++b) {
        r[b - 1] = flow.charge[b] + flow.book_station_total[b] - flow.station_drop_inflow(b) -
                   flow.charge[b - 1];
    }
    r[levels - 1] = flow.charge[0] - flow.station_drop_inflow(0);
    r[levels] = flow.book_station_total[levels] - flow.charge[levels - 1];
    for (int b = 1; b <= levels - 1; ++b) {
        r[levels + b] = flow.book_random_total[b] - flow.random_drop_inflow(b);
    }
    r[2 * levels] = flow.collect - flow.random_drop_inflow(0);
    r[2 * levels + 1] = flow.distribute - flow.collect;
    return r;
}

namespace {

struct ClosureCounts {
    std::vector<double> n_booked;
    std::vector<double> n_inuse;
    double n_random0 = 0.0;
    double n_truck_empty = 0.0;
    double n_truck_full = 0.0;
    double n_depot_charging = 0.0;
    double n_depot_ready = 0.0;
    double trucks = 0.0;
    double route = 0.0;
    double duration = 0.0;
    double rider_count = 0.0;
};

ClosureCounts closure_counts(const SystemParams& params, const DesignVariables& design,
                             const FlowRates& flow, const std::vector<double>& pickup_distance,
                             const TripTypeProfile& profile) {
    const int levels = flow.battery_levels;
    const int types = flow.max_trip_levels;
    ClosureCounts cc;
    cc.n_booked.assign(levels + 1, 0.0);
    cc.n_inuse.assign(levels + 1, 0.0);
    for (int b = 1; b <= levels; ++b) {
        for (int t = 1; t <= std::min(types, b); ++t) {
            const double booked = flow.at(flow.book_station, b, t) + flow.at(flow.book_random, b, t);
            const double dropped = flow.at(flow.drop_station, b, t) + flow.at(flow.drop_random, b, t);
            cc.n_booked[b] += booked * pickup_distance[t] / params.speed_walk;
            cc.n_inuse[b] += dropped * profile.mean_length[t - 1] / params.speed_scooter;
        }
        cc.rider_count += cc.n_booked[b] + cc.n_inuse[b];
    }
    cc.duration = cc.rider_count / params.trip_rate();

    const double e_f = flow.collect;
    const double e_r = flow.distribute;
    const double c_f = flow.depot_charge;
    if (e_f > 0.0 || e_r > 0.0) {
        if (!(design.truck_load > 0.0) || !(design.headway > 0.0)) {
            throw SolveError("close_fleet: repositioning flow requires positive headway and truck load");
        }
        const double h = design.headway;
        cc.trucks = h * e_r / design.truck_load;
        if (cc.trucks > 0.0) {
            cc.route = 2.0 * cc.trucks * params.depot_distance +
                       0.95 * std::sqrt(params.area() * (h * e_r + h * e_f));
            const double leg = cc.route / (2.0 * cc.trucks * params.speed_truck);
            cc.n_random0 = e_f * h / 2.0 + e_f * leg;
            cc.n_truck_empty = e_f * leg;
            cc.n_truck_full = e_r * leg;
        } else {
            cc.n_random0 = e_f * h / 2.0;
        }
        cc.n_depot_charging = params.charging.total() * c_f;
        cc.n_depot_ready = c_f * h / 2.0;
    }
    return cc;
}

} // namespace

double SteadyState::station_total() const {
    double s = 0.0;
    for (double v : n_station) s += v;
    return s;
}

double SteadyState::random_total() const {
    double s = 0.0;
    for (std::size_t b = 1; b < n_random.size(); ++b) s += n_random[b];
    return s;
}

SteadyState close_fleet(const SystemParams& params, const DesignVariables& design,
                        const FlowRates& flow) {
    const int levels = flow.battery_levels;
    const int types = flow.max_trip_levels;
    const double tol = 1e-6 * std::max(1.0, params.trip_rate());
    if (std::abs(flow.collect - flow.distribute) > tol) {
        throw SolveError("close_fleet: depot loop not balanced (collect != distribute)");
    }

    SteadyState st;
    st.flow = flow;
    st.n_station = design.n_station;
    st.n_station.resize(levels + 1, 0.0);
    st.n_random.assign(levels + 1, 0.0);
    for (std::size_t i = 0; i < design.n_random.size() && i + 1 <= static_cast<std::size_t>(levels); ++i) {
        st.n_random[i + 1] = design.n_random[i];
    }

    const TripTypeProfile profile = trip_type_profile(params.demand, types);
    std::vector<double> pickup(types + 1, 0.0);
    for (int t = 1; t <= types; ++t) {
        double booked = 0.0;
        for (int b = t; b <= levels; ++b) {
            booked += flow.at(flow.book_station, b, t) + flow.at(flow.book_random, b, t);
        }
        if (booked > 0.0) {
            double suitable_random = 0.0;
            for (int b = t; b <= levels; ++b) suitable_random += st.n_random[b];
            double weighted = 0.0;
            double suitable_station = 0.0;
            for (int b = t; b <= levels; ++b) {
                const double w = design.weights.at(t, b);
                if (w > 0.0) {
                    weighted += w * st.n_station[b];
                    suitable_station += st.n_station[b];
                }
            }
            double c1 = 0.0;
            if (design.grid_dim > 0 && weighted > 0.0) {
                double mass = 0.0;
                for (double v : st.n_station) mass += v;
                c1 = p_c1(mass, suitable_station, design.grid_dim, design.chargers);
            }
            pickup[t] = expected_pickup_distance(suitable_random, design.grid_dim,
                                                 design.station_spacing(params.region), params.region,
                                                 c1);
        }
    }

    const ClosureCounts cc = closure_counts(params, design, flow, pickup, profile);
    st.n_booked = cc.n_booked;
    st.n_inuse = cc.n_inuse;
    st.n_random[0] = cc.n_random0;
    st.n_truck_empty = cc.n_truck_empty;
    st.n_truck_full = cc.n_truck_full;
    st.n_depot_charging = cc.n_depot_charging;
    st.n_depot_ready = cc.n_depot_ready;
    st.trucks_per_headway = cc.trucks;
    st.route_length = cc.route;
    st.mean_trip_duration = cc.duration;
    st.pickup_distance = pickup;

    double fleet = 0.0;
    for (int b = 0; b <= levels; ++b) {
        fleet += st.n_station[b] + st.n_random[b] + st.n_booked[b] + st.n_inuse[b];
    }
    fleet += st.n_truck_empty + st.n_truck_full + st.n_depot_charging + st.n_depot_ready;
    st.fleet = fleet;

    double inf = 0.0;
    for (double r : conservation_residuals(flow)) inf = std::max(inf, std::abs(r));
    st.residual_inf = inf;
    return st;
}

namespace {

// Dense LU with partial pivoting; returns false on (near-)singularity.
bool lu_solve(std::vector<double> a, std::vector<double> b, int n, std::vector<double>& out) {
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int col = 0; col < n; ++col) {
        int best = col;
        double best_abs = std::abs(a[col * n + col]);
        for (int row = col + 1; row < n; ++row) {
            const double v = std::abs(a[row * n + col]);
            if (v > best_abs) {
                best = row;
                best_abs = v;
            }
        }
        if (best_abs < 1e-300) return false;
        if (best != col) {
            for (int j = 0; j < n; ++j) std::swap(a[col * n + j], a[best * n + j]);
            std::swap(b[col], b[best]);
        }
        const double inv = 1.0 / a[col * n + col];
        for (int row = col + 1; row < n; ++row) {
            const double factor = a[row * n + col] * inv;
            if (factor == 0.0) continue;
            a[row * n + col] = 0.0;
            for (int j = col + 1; j < n; ++j) a[row * n + j] -= factor * a[col * n + j];
            b[row] -= factor * b[col];
        }
    }
    out.assign(n, 0.0);
    for (int row = n - 1; row >= 0; --row) {
        double s = b[row];
        for (int j = row + 1; j < n; ++j) s -= a[row * n + j] * out[j];
        out[row] = s / a[row * n + row];
    }
    return true;
}

struct Problem {
    const SystemParams* params = nullptr;
    const DesignVariables* design = nullptr;
    FixTotal mode = FixTotal::Random;
    double target = 0.0;
    int levels = 0;
    bool stations = false;
    double flow_scale = 1.0;
    double norm_scale = 1.0;

    int dim() const { return stations ? 2 * levels + 1 : levels; }

    void unpack(const std::vector<double>& x, std::vector<double>& n_s,
                std::vector<double>& n_r) const {
        n_s.assign(levels + 1, 0.0);
        n_r.assign(levels + 1, 0.0);
        if (stations) {
            for (int b = 0; b <= levels; ++b) n_s[b] = x[b];
            for (int b = 1; b <= levels; ++b) n_r[b] = x[levels + b];
        } else {
            for (int b = 1; b <= levels; ++b) n_r[b] = x[b - 1];
        }
    }

    void project(std::vector<double>& x) const {
        const double floor_r = 1e-9;
        if (stations) {
            double total = 0.0;
            for (int b = 0; b <= levels; ++b) {
                x[b] = std::max(x[b], 0.0);
                total += x[b];
            }
            // Keep a sliver of slack inside the capacity simplex so finite
            // differences near the boundary stay evaluable.
            const double cap = (1.0 - 1e-9) * static_cast<double>(design->grid_dim) *
                               design->grid_dim * design->chargers;
            if (total > cap && total > 0.0) {
                const double shrink = cap / total;
                for (int b = 0; b <= levels; ++b) x[b] *= shrink;
            }
            for (int b = 1; b <= levels; ++b) x[levels + b] = std::max(x[levels + b], floor_r);
        } else {
            for (int b = 1; b <= levels; ++b) x[b - 1] = std::max(x[b - 1], floor_r);
        }
    }

    // Expected sojourn of a station vehicle at one charge level: min of the
    // booking clock (intensity mu) and the level duration tau.
    static double sojourn(double mu, double tau) {
        const double x = mu * tau;
        if (x < 1e-8) return tau * (1.0 - 0.5 * x + x * x / 6.0);
        return -std::expm1(-x) / mu;
    }

    // Scaled residual vector; throws only on unservable supply, which the
    // projection floor prevents.
    std::vector<double> residual(const std::vector<double>& x, KernelCache* cache) const {
        std::vector<double> n_s, n_r;
        unpack(x, n_s, n_r);
        const RateContext ctx = evaluate_rates(*params, *design, n_s, n_r, cache);
        const auto& f = ctx.flow;
        std::vector<double> r;
        r.reserve(dim());
        const double inv = 1.0 / flow_scale;
        if (stations) {
            // Little's law per charging class: count = inflow * expected
            // sojourn. Equivalent to the node flow balance wherever the
            // booking intensity is positive, and it additionally pins the
            // classes bookings cannot drain (zero intensity), where the flow
            // balance degenerates to an identity.
            double below = 0.0;
            for (int b = 0; b <= levels - 1; ++b) {
                const double inflow = f.station_drop_inflow(b) + below;
                const double dwell = sojourn(ctx.station_intensity[b], params->charging.tau[b]);
                r.push_back((n_s[b] - inflow * dwell) / norm_scale);
                below = f.charge[b];
            }
        }
        for (int b = 1; b <= levels - 1; ++b) {
            r.push_back((f.book_random_total[b] - f.random_drop_inflow(b)) * inv);
        }
        if (stations) {
            r.push_back((f.distribute - f.collect) * inv);
        }
        double total = 0.0;
        switch (mode) {
            case FixTotal::Random:
                for (int b = 1; b <= levels; ++b) total += n_r[b];
                break;
            case FixTotal::Station:
                for (int b = 0; b <= levels; ++b) total += n_s[b];
                break;
            case FixTotal::Fleet: {
                const ClosureCounts cc =
                    closure_counts(*params, *design, f, ctx.pickup_distance, ctx.profile);
                total = cc.n_random0 + cc.rider_count + cc.n_truck_empty + cc.n_truck_full +
                        cc.n_depot_charging + cc.n_depot_ready;
                for (int b = 0; b <= levels; ++b) total += n_s[b] + n_r[b];
                break;
            }
        }
        r.push_back((total - target) / norm_scale);
        return r;
    }

    // Unscaled conservation residual: the documented flow vector plus the
    // per-class sojourn identities expressed in flow units.
    double conservation_inf(const std::vector<double>& x, KernelCache* cache) const {
        std::vector<double> n_s, n_r;
        unpack(x, n_s, n_r);
        const RateContext ctx = evaluate_rates(*params, *design, n_s, n_r, cache);
        double inf = 0.0;
        for (double r : conservation_residuals(ctx.flow)) inf = std::max(inf, std::abs(r));
        if (stations) {
            double below = 0.0;
            for (int b = 0; b <= levels - 1; ++b) {
                const double inflow = ctx.flow.station_drop_inflow(b) + below;
                const double dwell = sojourn(ctx.station_intensity[b], params->charging.tau[b]);
                inf = std::max(inf, std::abs(n_s[b] - inflow * dwell) / params->charging.tau[b]);
                below = ctx.flow.charge[b];
            }
        }
        return inf;
    }
};

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double merit(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return 0.5 * s;
}

struct NewtonOutcome {
    bool converged = false;
    std::vector<double> x;
    double residual_inf = 0.0; // unscaled conservation norm
};

NewtonOutcome newton_solve(const Problem& prob, std::vector<double> x, const SolveOptions& opt) {
    NewtonOutcome out;
    KernelCache cache;
    prob.project(x);
    const int n = prob.dim();
    std::vector<double> r;
    try {
        r = prob.residual(x, &cache);
    } catch (const std::exception& e) {
        if (opt.trace) std::fprintf(stderr, "newton: seed rejected: %s\n", e.what());
        return out;
    }
    double phi = merit(r);
    const double typical = std::max(1.0, prob.norm_scale / n);

    int stall = 0;
    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        const double unscaled = prob.conservation_inf(x, &cache);
        if (unscaled <= opt.tol && inf_norm(r) <= opt.tol) {
            out.converged = true;
            out.x = x;
            out.residual_inf = unscaled;
            return out;
        }
        if (stall > 6) break;
        // Hopeless-trajectory cutoffs: quadratic convergence shows up early,
        // so a still-large residual after this many damped steps means the
        // start is not going to make it.
        if (iter >= 25 && inf_norm(r) > 1e-2) break;
        if (iter >= 60 && inf_norm(r) > 1e-5) break;

        // Finite-difference Jacobian, column per unknown. Steps are taken
        // without re-projection (a projection rescale would bleed into other
        // coordinates); columns at the capacity boundary step backward, which
        // the kernels' small relative slack tolerates.
        std::vector<double> jac(static_cast<std::size_t>(n) * n, 0.0);
        bool fd_ok = true;
        const double cap = prob.stations ? static_cast<double>(prob.design->grid_dim) *
                                               prob.design->grid_dim * prob.design->chargers
                                         : 0.0;
        double station_sum = 0.0;
        if (prob.stations) {
            for (int b = 0; b <= prob.levels; ++b) station_sum += x[b];
        }
        for (int j = 0; j < n && fd_ok; ++j) {
            double h = 1e-6 * std::max(std::abs(x[j]), 1e-2 * typical);
            const bool station_coord = prob.stations && j <= prob.levels;
            if (station_coord && station_sum + h > cap) h = -std::min(h, x[j]);
            if (!station_coord && x[j] + h < 1e-9) h = std::abs(h);
            if (h == 0.0) h = 1e-9;
            std::vector<double> xp = x;
            xp[j] += h;
            std::vector<double> rp;
            try {
                rp = prob.residual(xp, &cache);
            } catch (const std::exception&) {
                fd_ok = false;
                break;
            }
            for (int i = 0; i < n; ++i) jac[i * static_cast<std::size_t>(n) + j] = (rp[i] - r[i]) / h;
        }
        if (!fd_ok) {
            if (opt.trace) std::fprintf(stderr, "newton[%d]: fd failed\n", iter);
            break;
        }

        std::vector<double> neg_r(n);
        for (int i = 0; i < n; ++i) neg_r[i] = -r[i];
        std::vector<double> dx;
        bool have_dir = lu_solve(jac, neg_r, n, dx);

        auto try_direction = [&](const std::vector<double>& dir) -> bool {
            double alpha = 1.0;
            for (int bt = 0; bt < 30; ++bt) {
                std::vector<double> xn(n);
                for (int i = 0; i < n; ++i) xn[i] = x[i] + alpha * dir[i];
                prob.project(xn);
                std::vector<double> rn;
                try {
                    rn = prob.residual(xn, &cache);
                } catch (const std::exception&) {
                    alpha *= 0.5;
                    continue;
                }
                const double phin = merit(rn);
                if (phin <= phi * (1.0 - 1e-4 * alpha) || phin < 1e-30) {
                    x = std::move(xn);
                    r = std::move(rn);
                    stall = (phin > 0.99 * phi) ? stall + 1 : 0;
                    phi = phin;
                    return true;
                }
                alpha *= 0.5;
            }
            return false;
        };

        bool stepped = have_dir && try_direction(dx);
        if (!stepped) {
            // Levenberg-Marquardt fallback: (J^T J + mu diag) dx = -J^T r.
            std::vector<double> jtj(static_cast<std::size_t>(n) * n, 0.0);
            std::vector<double> jtr(n, 0.0);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    jtr[j] += jac[i * static_cast<std::size_t>(n) + j] * r[i];
                    for (int l = j; l < n; ++l) {
                        jtj[j * static_cast<std::size_t>(n) + l] +=
                            jac[i * static_cast<std::size_t>(n) + j] *
                            jac[i * static_cast<std::size_t>(n) + l];
                    }
                }
            }
            for (int j = 0; j < n; ++j) {
                for (int l = 0; l < j; ++l) {
                    jtj[j * static_cast<std::size_t>(n) + l] = jtj[l * static_cast<std::size_t>(n) + j];
                }
            }
            double mu = 1e-6;
            for (int round = 0; round < 8 && !stepped; ++round) {
                std::vector<double> damped = jtj;
                for (int j = 0; j < n; ++j) {
                    const double dj = std::max(jtj[j * static_cast<std::size_t>(n) + j], 1e-12);
                    damped[j * static_cast<std::size_t>(n) + j] += mu * dj;
                }
                std::vector<double> rhs(n);
                for (int j = 0; j < n; ++j) rhs[j] = -jtr[j];
                std::vector<double> lm_dx;
                if (lu_solve(damped, rhs, n, lm_dx) && try_direction(lm_dx)) {
                    stepped = true;
                    break;
                }
                mu *= 12.0;
            }
        }
        if (opt.trace) {
            std::fprintf(stderr, "newton[%d]: |r|=%.3e phi=%.3e stepped=%d stall=%d\n", iter,
                         inf_norm(r), phi, stepped ? 1 : 0, stall);
        }
        if (!stepped) break;
    }

    const double unscaled = prob.conservation_inf(x, &cache);
    if (unscaled <= opt.accept_tol && inf_norm(r) <= opt.accept_tol) {
        out.converged = true;
        out.x = x;
        out.residual_inf = unscaled;
    }
    return out;
}

std::vector<std::vector<double>> seed_starts(const Problem& prob, const SolveOptions& opt) {
    std::vector<std::vector<double>> starts;
    const int levels = prob.levels;
    const double target = std::max(prob.target, 1.0);
    if (!prob.stations) {
        const double per = (prob.mode == FixTotal::Fleet ? 0.6 : 1.0) * target / levels;
        for (double tilt : {0.0, 1.0, -0.5}) {
            std::vector<double> x(levels);
            double mass = 0.0;
            for (int b = 1; b <= levels; ++b) mass += 1.0 + tilt * b / levels;
            for (int b = 1; b <= levels; ++b) {
                x[b - 1] = per * levels * (1.0 + tilt * b / levels) / mass;
            }
            starts.push_back(std::move(x));
        }
        return starts;
    }
    const double cap = static_cast<double>(prob.design->grid_dim) * prob.design->grid_dim *
                       prob.design->chargers;
    const double random_share = prob.mode == FixTotal::Fleet ? 0.5 : 1.0;
    const double random_total = random_share * target;
    struct Pattern { double station_fill; bool top_heavy; };
    const Pattern patterns[] = {{0.05, false}, {0.35, true},  {0.15, true}, {0.60, false},
                                {0.95, true},  {0.85, false}, {0.02, true}, {0.45, false}};
    for (const auto& pat : patterns) {
        if (static_cast<int>(starts.size()) >= opt.max_starts) break;
        std::vector<double> x(2 * levels + 1, 0.0);
        const double station_total =
            std::min(pat.station_fill * cap,
                     prob.mode == FixTotal::Fleet ? 0.8 * target : 4.0 * target + 8.0 * levels);
        double mass = 0.0;
        for (int b = 0; b <= levels; ++b) mass += pat.top_heavy ? (b + 1.0) : 1.0;
        for (int b = 0; b <= levels; ++b) {
            x[b] = station_total * (pat.top_heavy ? (b + 1.0) : 1.0) / mass;
        }
        for (int b = 1; b <= levels; ++b) x[levels + b] = random_total / levels;
        starts.push_back(std::move(x));
    }
    return starts;
}

SteadyState finish_state(const SystemParams& params, const DesignVariables& design,
                         const Problem& prob, const NewtonOutcome& outcome) {
    std::vector<double> n_s, n_r;
    prob.unpack(outcome.x, n_s, n_r);
    DesignVariables solved = design;
    solved.n_station = n_s;
    solved.n_random.assign(n_r.begin() + 1, n_r.end());
    const FlowRates flow = compute_rates(params, solved);
    SteadyState st = close_fleet(params, solved, flow);
    st.residual_inf = std::max(st.residual_inf, outcome.residual_inf);
    return st;
}

} // namespace

SteadyState solve_steady_state(const SystemParams& params, const DesignVariables& design,
                               FixTotal mode, double target, const SolveOptions& options) {
    if (!(target > 0.0)) throw SolveError("solve_steady_state: target total must be positive");
    Problem prob;
    prob.params = &params;
    prob.design = &design;
    prob.mode = mode;
    prob.target = target;
    prob.levels = params.battery_levels;
    prob.stations = design.grid_dim > 0;
    prob.flow_scale = std::max(1.0, params.trip_rate());
    prob.norm_scale = std::max(1.0, target);
    if (!prob.stations && mode == FixTotal::Station) {
        throw SolveError("solve_steady_state: station total fixed but no stations in the design");
    }

    std::vector<std::vector<double>> starts;
    if (options.warm_start && static_cast<int>(options.warm_start->size()) == prob.dim()) {
        starts.push_back(*options.warm_start);
    }
    for (auto& s : seed_starts(prob, options)) starts.push_back(std::move(s));

    for (const auto& start : starts) {
        const NewtonOutcome outcome = newton_solve(prob, start, options);
        if (outcome.converged) return finish_state(params, design, prob, outcome);
    }
    throw SolveError("solve_steady_state: no starting point converged");
}

std::vector<EquilibriumBranch> find_equilibria(const SystemParams& params,
                                               const DesignVariables& design, double fleet_target,
                                               int n_starts, const SolveOptions& options) {
    Problem prob;
    prob.params = &params;
    prob.design = &design;
    prob.mode = FixTotal::Fleet;
    prob.target = fleet_target;
    prob.levels = params.battery_levels;
    prob.stations = design.grid_dim > 0;
    prob.flow_scale = std::max(1.0, params.trip_rate());
    prob.norm_scale = std::max(1.0, fleet_target);

    std::vector<std::vector<double>> roots;
    std::vector<SteadyState> states;
    const int levels = params.battery_levels;
    for (int s = 0; s < n_starts; ++s) {
        // Spread the seeded random-idle share geometrically across starts; the
        // two equilibria differ mainly in how much of the fleet idles free.
        const double frac = 0.01 * std::pow((0.85 / 0.01), s / std::max(1.0, n_starts - 1.0));
        std::vector<double> x(prob.dim(), 0.0);
        if (prob.stations) {
            const double cap = static_cast<double>(design.grid_dim) * design.grid_dim *
                               design.chargers;
            const double station_total = std::min(0.45 * fleet_target, 0.5 * cap);
            for (int b = 0; b <= levels; ++b) x[b] = station_total / (levels + 1);
            for (int b = 1; b <= levels; ++b) x[levels + b] = frac * fleet_target / levels;
        } else {
            for (int b = 1; b <= levels; ++b) x[b - 1] = frac * fleet_target / levels;
        }
        const NewtonOutcome outcome = newton_solve(prob, x, options);
        if (!outcome.converged) continue;
        bool duplicate = false;
        for (const auto& seen : roots) {
            double diff = 0.0;
            double norm = 1.0;
            for (std::size_t i = 0; i < seen.size(); ++i) {
                diff = std::max(diff, std::abs(seen[i] - outcome.x[i]));
                norm = std::max(norm, std::abs(seen[i]));
            }
            if (diff / norm <= 1e-4) {
                duplicate = true;
                break;
            }
        }
        if (duplicate) continue;
        roots.push_back(outcome.x);
        states.push_back(finish_state(params, design, prob, outcome));
    }

    std::vector<std::size_t> order(states.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return states[a].mean_trip_duration < states[b].mean_trip_duration;
    });
    std::vector<EquilibriumBranch> out;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        out.push_back({rank == 0, std::move(states[order[rank]])});
    }
    return out;
}

std::vector<double> pack_unknowns(const SteadyState& state, int grid_dim) {
    const int levels = static_cast<int>(state.n_station.size()) - 1;
    std::vector<double> x;
    if (grid_dim > 0) {
        x.reserve(2 * levels + 1);
        for (int b = 0; b <= levels; ++b) x.push_back(state.n_station[b]);
        for (int b = 1; b <= levels; ++b) x.push_back(state.n_random[b]);
    } else {
        for (int b = 1; b <= levels; ++b) x.push_back(state.n_random[b]);
    }
    return x;
}

} // namespace scoot
