#include "scoot/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

namespace scoot {

namespace {

constexpr double kInfeasible = 5e6;

// Adaptive Nelder-Mead on the unit box; evaluations outside the box are
// clipped before calling the objective, so the objective always sees feasible
// coordinates. Deterministic for a given starting point.
struct Simplex {
    int dim;
    std::function<double(const std::vector<double>&)> eval;
    int evaluations = 0;

    static void clip(std::vector<double>& y) {
        for (double& v : y) v = std::clamp(v, 0.0, 1.0);
    }

    std::pair<std::vector<double>, double> run(std::vector<double> y0, double radius,
                                               int max_evals) {
        clip(y0);
        const int n = dim;
        std::vector<std::vector<double>> pts(n + 1, y0);
        std::vector<double> vals(n + 1);
        for (int j = 0; j < n; ++j) {
            pts[j + 1][j] = y0[j] + (y0[j] > 0.5 ? -radius : radius);
            clip(pts[j + 1]);
        }
        for (int i = 0; i <= n; ++i) vals[i] = call(pts[i]);

        const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
        while (evaluations < max_evals) {
            std::vector<int> order(n + 1);
            for (int i = 0; i <= n; ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
            std::vector<std::vector<double>> spts(n + 1);
            std::vector<double> svals(n + 1);
            for (int i = 0; i <= n; ++i) {
                spts[i] = pts[order[i]];
                svals[i] = vals[order[i]];
            }
            pts = std::move(spts);
            vals = std::move(svals);

            double spread = 0.0;
            for (int j = 0; j < n; ++j) {
                spread = std::max(spread, std::abs(pts[n][j] - pts[0][j]));
            }
            if (spread < 1e-5 && vals[n] - vals[0] < 1e-10 * (1.0 + std::abs(vals[0]))) break;

            std::vector<double> centroid(n, 0.0);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) centroid[j] += pts[i][j] / n;
            }
            auto blend = [&](double coef) {
                std::vector<double> y(n);
                for (int j = 0; j < n; ++j) y[j] = centroid[j] + coef * (centroid[j] - pts[n][j]);
                clip(y);
                return y;
            };

            auto reflected = blend(alpha);
            const double fr = call(reflected);
            if (fr < vals[0]) {
                auto expanded = blend(gamma);
                const double fe = call(expanded);
                if (fe < fr) {
                    pts[n] = expanded;
                    vals[n] = fe;
                } else {
                    pts[n] = reflected;
                    vals[n] = fr;
                }
            } else if (fr < vals[n - 1]) {
                pts[n] = reflected;
                vals[n] = fr;
            } else {
                auto contracted = blend(fr < vals[n] ? rho : -rho);
                const double fc = call(contracted);
                if (fc < std::min(fr, vals[n])) {
                    pts[n] = contracted;
                    vals[n] = fc;
                } else {
                    for (int i = 1; i <= n; ++i) {
                        for (int j = 0; j < n; ++j) {
                            pts[i][j] = pts[0][j] + sigma * (pts[i][j] - pts[0][j]);
                        }
                        vals[i] = call(pts[i]);
                    }
                }
            }
        }
        int best = 0;
        for (int i = 1; i <= n; ++i) {
            if (vals[i] < vals[best]) best = i;
        }
        return {pts[best], vals[best]};
    }

private:
    double call(const std::vector<double>& y) {
        ++evaluations;
        return eval(y);
    }
};

struct SearchSpace {
    const SystemParams* params = nullptr;
    const OptimizerBounds* bounds = nullptr;
    PriorityScheme scheme = PriorityScheme::PW1;
    int grid_dim = 0;
    int promo_active = 0;
    bool depot_only = false;

    int dim() const { return depot_only ? 3 : 4 + promo_active; }

    double random_lo() const { return 0.02 * params->area(); }
    double random_hi() const { return params->area() * std::max(2.0, 1.2 * params->demand); }

    DesignVariables decode(const std::vector<double>& y, double& random_total) const {
        DesignVariables d;
        d.weights = make_priority_weights(scheme, params->battery_levels, params->max_trip_levels);
        const double lr = std::log(random_lo());
        const double hr = std::log(random_hi());
        random_total = std::exp(lr + y[0] * (hr - lr));
        if (depot_only) {
            d.grid_dim = 0;
            d.chargers = 0.0;
            d.headway = bounds->headway_min + y[1] * (bounds->headway_max - bounds->headway_min);
            d.truck_load = bounds->load_min + y[2] * (bounds->load_max - bounds->load_min);
            d.promotions.assign(params->battery_levels, 0.0);
            return d;
        }
        d.grid_dim = grid_dim;
        d.chargers = bounds->chargers_min + y[1] * (bounds->chargers_max - bounds->chargers_min);
        d.headway = bounds->headway_min + y[2] * (bounds->headway_max - bounds->headway_min);
        d.truck_load = bounds->load_min + y[3] * (bounds->load_max - bounds->load_min);
        d.promotions.assign(params->battery_levels, 0.0);
        const double cap = params->value_of_time * (params->region / grid_dim) / params->speed_walk;
        for (int j = 0; j < promo_active && j < params->battery_levels; ++j) {
            d.promotions[j] = y[4 + j] * cap;
        }
        return d;
    }
};

struct Evaluation {
    double cost = kInfeasible;
    bool ok = false;
    DesignVariables design;
    SteadyState steady;
};

Evaluation evaluate_point(const SearchSpace& space, const std::vector<double>& y,
                          std::optional<std::vector<double>>& warm) {
    Evaluation ev;
    double random_total = 0.0;
    ev.design = space.decode(y, random_total);
    // Inner feasibility map must fail fast: the outer search probes plenty of
    // infeasible corners and a full multi-start budget there is wasted work.
    SolveOptions opts;
    opts.max_starts = 2;
    opts.max_iterations = 60;
    if (warm) opts.warm_start = warm;
    try {
        ev.steady = solve_steady_state(*space.params, ev.design, FixTotal::Random, random_total, opts);
    } catch (const std::exception&) {
        // keep the last successful warm vector: the next feasible probe is
        // usually near it
        return ev;
    }
    warm = pack_unknowns(ev.steady, ev.design.grid_dim);
    if (ev.design.grid_dim > 0) {
        const double cap = static_cast<double>(ev.design.grid_dim) * ev.design.grid_dim *
                           ev.design.chargers;
        if (ev.steady.station_total() > cap * (1.0 + 1e-9)) return ev;
    }
    ev.design.n_station = ev.steady.n_station;
    ev.design.n_random.assign(ev.steady.n_random.begin() + 1, ev.steady.n_random.end());
    ev.cost = cost_breakdown(*space.params, ev.steady, ev.design).per_rider;
    ev.ok = true;
    return ev;
}

// Documented multi-start seeds in the scaled box. The layout is
// [random-total, chargers, headway, load, promotions...]; depot-only uses the
// first three slots.
std::vector<double> seed_point(const SearchSpace& space, int index) {
    static const double nr[] = {0.45, 0.30, 0.60, 0.25, 0.50, 0.70, 0.35, 0.55, 0.40, 0.65};
    static const double qq[] = {0.50, 0.70, 0.40, 0.90, 0.30, 0.60, 0.55, 0.80, 0.45, 0.35};
    static const double hh[] = {0.75, 0.90, 0.60, 0.95, 0.50, 0.30, 0.85, 0.70, 0.80, 0.45};
    static const double rr[] = {0.40, 0.30, 0.60, 0.90, 0.50, 0.70, 0.25, 0.50, 0.35, 0.55};
    static const double p0[] = {0.80, 0.60, 0.90, 0.95, 0.50, 0.70, 0.85, 0.40, 1.00, 0.65};
    const int i = index % 10;
    std::vector<double> y(space.dim(), 0.5);
    y[0] = nr[i];
    if (space.depot_only) {
        y[1] = hh[i];
        y[2] = rr[i];
        return y;
    }
    y[1] = qq[i];
    y[2] = hh[i];
    y[3] = rr[i];
    for (int j = 0; j < space.promo_active; ++j) {
        y[4 + j] = std::clamp(p0[i] * (1.0 - 0.22 * j), 0.0, 1.0);
    }
    return y;
}

struct KBest {
    double cost = std::numeric_limits<double>::infinity();
    std::vector<double> y;
    Evaluation ev;
};

KBest search_grid_dim(const SearchSpace& space, const OptimizeOptions& options,
                      std::vector<SearchLogRow>& log, double incumbent) {
    KBest best;
    for (int s = 0; s < options.starts; ++s) {
        std::optional<std::vector<double>> warm;
        Simplex nm;
        nm.dim = space.dim();
        nm.eval = [&](const std::vector<double>& y) {
            return evaluate_point(space, y, warm).cost;
        };
        auto [y_coarse, f_coarse] = nm.run(seed_point(space, s), 0.16, options.coarse_evals);
        double f_best = f_coarse;
        std::vector<double> y_best = y_coarse;
        // Refine only starts that are in contention.
        if (f_coarse < 1.25 * std::min(incumbent, best.cost)) {
            auto [y_fine, f_fine] = nm.run(y_coarse, 0.04, nm.evaluations + options.refine_evals);
            if (f_fine < f_best) {
                f_best = f_fine;
                y_best = y_fine;
            }
        }
        log.push_back({space.grid_dim, s, f_best, nm.evaluations});
        if (f_best < best.cost) {
            std::optional<std::vector<double>> w2 = warm;
            Evaluation ev = evaluate_point(space, y_best, w2);
            if (ev.ok && ev.cost < best.cost) {
                best.cost = ev.cost;
                best.y = y_best;
                best.ev = std::move(ev);
            }
        }
        // A grid dimension whose early starts trail the incumbent badly will
        // not win; spend the remaining budget elsewhere.
        if (s >= 1 && best.cost > 1.12 * incumbent) break;
    }
    return best;
}

// Charger count must be integral in a final design; test both neighbours of
// the continuous optimum and keep the better feasible one, re-fitting the
// remaining continuous decisions with a short refinement pass.
void round_chargers(const SearchSpace& space, const OptimizeOptions& options, KBest& best) {
    if (space.depot_only || !best.ev.ok) return;
    const double q_cont = best.ev.design.chargers;
    const double span = space.bounds->chargers_max - space.bounds->chargers_min;
    KBest rounded;
    for (double q : {std::floor(q_cont), std::ceil(q_cont)}) {
        q = std::clamp(q, space.bounds->chargers_min, space.bounds->chargers_max);
        std::vector<double> y = best.y;
        y[1] = span > 0.0 ? (q - space.bounds->chargers_min) / span : 0.0;
        std::optional<std::vector<double>> warm;
        Simplex nm;
        nm.dim = space.dim();
        nm.eval = [&](const std::vector<double>& yy) {
            std::vector<double> fixed = yy;
            fixed[1] = y[1]; // hold the charger count at the integer under test
            return evaluate_point(space, fixed, warm).cost;
        };
        auto [y_ref, f_ref] = nm.run(y, 0.03, options.refine_evals);
        y_ref[1] = y[1];
        std::optional<std::vector<double>> w2;
        Evaluation ev = evaluate_point(space, y_ref, w2);
        if (ev.ok && ev.cost < rounded.cost) {
            rounded.cost = ev.cost;
            rounded.y = y_ref;
            rounded.ev = std::move(ev);
        }
    }
    if (rounded.ev.ok) best = std::move(rounded);
}

// On-manifold polish: treat the idle vectors as free variables with the
// node-balance equations as equality constraints and descend the augmented
// Lagrangian by projected finite-difference gradient steps. The result is
// re-solved exactly before acceptance so feasibility is never degraded.
void polish_simultaneous(const SearchSpace& space, KBest& best) {
    if (!best.ev.ok) return;
    const SystemParams& params = *space.params;
    const int levels = params.battery_levels;
    DesignVariables design = best.ev.design;
    const bool stations = design.grid_dim > 0;
    const int nvar = stations ? 2 * levels + 1 : levels;

    std::vector<double> x(nvar);
    if (stations) {
        for (int b = 0; b <= levels; ++b) x[b] = design.n_station[b];
        for (int b = 1; b <= levels; ++b) x[levels + b] = design.n_random[b - 1];
    } else {
        for (int b = 1; b <= levels; ++b) x[b - 1] = design.n_random[b - 1];
    }

    const double flow_scale = std::max(1.0, params.trip_rate());
    auto eval_parts = [&](const std::vector<double>& v, std::vector<double>& cons) -> double {
        std::vector<double> n_s(levels + 1, 0.0), n_r(levels + 1, 0.0);
        if (stations) {
            for (int b = 0; b <= levels; ++b) n_s[b] = std::max(0.0, v[b]);
            for (int b = 1; b <= levels; ++b) n_r[b] = std::max(1e-9, v[levels + b]);
        } else {
            for (int b = 1; b <= levels; ++b) n_r[b] = std::max(1e-9, v[b - 1]);
        }
        const RateContext ctx = evaluate_rates(params, design, n_s, n_r);
        const auto& f = ctx.flow;
        cons.clear();
        if (stations) {
            // per-class sojourn identities, as in the root solver
            double below = 0.0;
            for (int b = 0; b <= levels - 1; ++b) {
                const double inflow = f.station_drop_inflow(b) + below;
                const double mu = ctx.station_intensity[b];
                const double x = mu * params.charging.tau[b];
                const double dwell = x < 1e-8 ? params.charging.tau[b] * (1.0 - 0.5 * x)
                                              : -std::expm1(-x) / mu;
                cons.push_back((n_s[b] - inflow * dwell) / std::max(1.0, best.ev.steady.fleet));
                below = f.charge[b];
            }
        }
        for (int b = 1; b <= levels - 1; ++b) {
            cons.push_back((f.book_random_total[b] - f.random_drop_inflow(b)) / flow_scale);
        }
        if (stations) {
            cons.push_back((f.distribute - f.collect) / flow_scale);
        }
        DesignVariables d2 = design;
        d2.n_station = n_s;
        d2.n_random.assign(n_r.begin() + 1, n_r.end());
        const SteadyState st = close_fleet(params, d2, f);
        return cost_breakdown(params, st, d2).per_rider;
    };

    std::vector<double> cons;
    double z0;
    try {
        z0 = eval_parts(x, cons);
    } catch (const std::exception&) {
        return;
    }
    std::vector<double> mu(cons.size(), 0.0);
    double rho = 10.0;

    auto lagrangian = [&](const std::vector<double>& v) -> double {
        std::vector<double> c;
        const double z = eval_parts(v, c);
        double acc = z;
        for (std::size_t i = 0; i < c.size(); ++i) acc += mu[i] * c[i] + 0.5 * rho * c[i] * c[i];
        return acc;
    };

    const double typical = std::max(1.0, best.ev.steady.fleet / nvar);
    for (int round = 0; round < 4; ++round) {
        for (int it = 0; it < 40; ++it) {
            double f0;
            try {
                f0 = lagrangian(x);
            } catch (const std::exception&) {
                return;
            }
            std::vector<double> grad(nvar);
            for (int j = 0; j < nvar; ++j) {
                const double h = 1e-6 * std::max(std::abs(x[j]), 1e-2 * typical);
                std::vector<double> xp = x;
                xp[j] += h;
                double fp;
                try {
                    fp = lagrangian(xp);
                } catch (const std::exception&) {
                    grad[j] = 0.0;
                    continue;
                }
                grad[j] = (fp - f0) / h;
            }
            double gnorm = 0.0;
            for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
            if (gnorm < 1e-9) break;
            double step = 0.1 * typical / gnorm;
            bool moved = false;
            for (int bt = 0; bt < 20; ++bt) {
                std::vector<double> xn = x;
                for (int j = 0; j < nvar; ++j) xn[j] = std::max(0.0, x[j] - step * grad[j]);
                double fn;
                try {
                    fn = lagrangian(xn);
                } catch (const std::exception&) {
                    step *= 0.5;
                    continue;
                }
                if (fn < f0 - 1e-12 * std::abs(f0)) {
                    x = std::move(xn);
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        try {
            eval_parts(x, cons);
        } catch (const std::exception&) {
            return;
        }
        for (std::size_t i = 0; i < cons.size(); ++i) mu[i] += rho * cons[i];
        rho *= 4.0;
    }

    // Repair: project the polished point back onto the manifold exactly and
    // keep it only if the true cost improved.
    double random_total = 0.0;
    const int offset = stations ? levels + 1 : 0;
    for (int b = 1; b <= levels; ++b) random_total += std::max(1e-9, x[offset + b - 1]);
    SolveOptions sopt;
    sopt.warm_start = x;
    try {
        SteadyState st = solve_steady_state(params, design, FixTotal::Random, random_total, sopt);
        DesignVariables d2 = design;
        d2.n_station = st.n_station;
        d2.n_random.assign(st.n_random.begin() + 1, st.n_random.end());
        if (d2.grid_dim > 0) {
            const double cap = static_cast<double>(d2.grid_dim) * d2.grid_dim * d2.chargers;
            if (st.station_total() > cap * (1.0 + 1e-9)) return;
        }
        const double z = cost_breakdown(params, st, d2).per_rider;
        if (z < best.cost) {
            best.cost = z;
            best.ev.design = d2;
            best.ev.steady = std::move(st);
            best.ev.cost = z;
        }
    } catch (const std::exception&) {
    }
    (void)z0;
}

OptimizeResult finish(const SystemParams& params, KBest& best, std::vector<SearchLogRow> log) {
    if (!best.ev.ok) throw SolveError("optimizer: no feasible design found within bounds");
    OptimizeResult res;
    res.design = best.ev.design;
    res.steady = best.ev.steady;
    res.cost = cost_breakdown(params, res.steady, res.design);
    res.log = std::move(log);
    return res;
}

} // namespace

OptimizeResult optimize_design(const SystemParams& params, PriorityScheme scheme,
                               const OptimizeOptions& options) {
    if (!options.bounds.valid()) throw std::invalid_argument("optimize_design: invalid bounds");
    std::vector<int> ks = options.k_values;
    if (ks.empty()) {
        const int k_lo = std::max(1, static_cast<int>(std::ceil(params.region / options.bounds.spacing_max - 1e-9)));
        const int k_hi = static_cast<int>(std::floor(params.region / options.bounds.spacing_min + 1e-9));
        for (int k = k_lo; k <= k_hi; ++k) ks.push_back(k);
    }
    std::vector<SearchLogRow> log;
    KBest overall;
    for (int k : ks) {
        SearchSpace space;
        space.params = &params;
        space.bounds = &options.bounds;
        space.scheme = scheme;
        space.grid_dim = k;
        space.promo_active = std::min(options.promo_active, params.battery_levels);
        KBest kb = search_grid_dim(space, options, log, overall.cost);
        if (!kb.ev.ok) continue;
        if (kb.cost < 1.05 * overall.cost) round_chargers(space, options, kb);
        if (options.polish_on_manifold && kb.cost < 1.02 * overall.cost) {
            polish_simultaneous(space, kb);
        }
        if (kb.cost < overall.cost) overall = std::move(kb);
    }
    return finish(params, overall, std::move(log));
}

OptimizeResult benchmark_depot_only(const SystemParams& params, const OptimizeOptions& options) {
    if (!options.bounds.valid()) throw std::invalid_argument("benchmark_depot_only: invalid bounds");
    SearchSpace space;
    space.params = &params;
    space.bounds = &options.bounds;
    space.depot_only = true;
    std::vector<SearchLogRow> log;
    KBest best = search_grid_dim(space, options, log,
                                 std::numeric_limits<double>::infinity());
    if (options.polish_on_manifold) polish_simultaneous(space, best);
    return finish(params, best, std::move(log));
}

RowEvaluation evaluate_design_row(const SystemParams& params, const DesignVariables& design,
                                  double random_total, const OptimizerBounds& bounds) {
    RowEvaluation row;
    row.steady = solve_steady_state(params, design, FixTotal::Random, random_total);
    DesignVariables solved = design;
    solved.n_station = row.steady.n_station;
    solved.n_random.assign(row.steady.n_random.begin() + 1, row.steady.n_random.end());
    row.cost = cost_breakdown(params, row.steady, solved);
    row.violations = validate(params, solved, bounds);
    return row;
}

} // namespace scoot
