#include "scoot/verify.hpp"

#include <cmath>
#include <thread>

namespace scoot {

DesignVariables verification_design(const SystemParams& params, int grid_dim) {
    DesignVariables d;
    d.grid_dim = grid_dim;
    d.chargers = 20.0;
    d.headway = 1.0;
    d.truck_load = 20.0;
    d.weights = make_priority_weights(PriorityScheme::PW1, params.battery_levels,
                                      params.max_trip_levels);
    d.promotions.assign(params.battery_levels, 0.0);
    if (grid_dim > 0) {
        const double spacing = params.region / grid_dim;
        const double cap = params.value_of_time * spacing / params.speed_walk;
        // Half of the catchment accepts at promotion cap/2; a quarter at
        // sqrt(2)/4 of the cap.
        d.promotions[0] = 0.5 * cap;
        d.promotions[1] = std::sqrt(2.0) / 4.0 * cap;
    }
    return d;
}

std::vector<VerifyCell> verify_model(const SystemParams& params, const VerifyGrid& grid) {
    std::vector<VerifyCell> cells;
    for (int k : grid.grid_dims) {
        for (double n : grid.random_totals) {
            VerifyCell cell;
            cell.grid_dim = k;
            cell.random_total = n;
            cells.push_back(cell);
        }
    }

    auto run_cell = [&](VerifyCell& cell) {
        const DesignVariables design = verification_design(params, cell.grid_dim);
        SteadyState model;
        try {
            model = solve_steady_state(params, design, FixTotal::Random, cell.random_total);
            cell.model_converged = true;
        } catch (const std::exception&) {
            return; // non-convergence is data, not a failure
        }
        cell.model_duration = model.mean_trip_duration;
        cell.model_fleet = model.fleet;
        cell.model_station_total = model.station_total();

        if (grid.tag_branches) {
            try {
                const auto branches = find_equilibria(params, design, model.fleet, 8);
                cell.branches = static_cast<int>(branches.size());
                if (!branches.empty()) {
                    cell.branch_low = branches.front().state.mean_trip_duration;
                    cell.branch_high = branches.back().state.mean_trip_duration;
                }
            } catch (const std::exception&) {
            }
        }

        for (std::uint64_t seed : grid.seeds) {
            SimConfig sc;
            sc.params = params;
            sc.design = design;
            sc.fleet = std::round(model.fleet);
            sc.initial_station_total = std::round(model.station_total());
            sc.horizon = grid.horizon;
            sc.warmup = grid.warmup;
            sc.cooldown = grid.cooldown;
            sc.seed = seed;
            const SimStats stats = run_simulation(sc);
            cell.sim_durations.push_back(stats.mean_trip_duration);
            cell.sim_lost.push_back(stats.lost_fraction);
        }
        double sum = 0.0;
        for (double d : cell.sim_durations) sum += d;
        cell.sim_mean = sum / cell.sim_durations.size();
        if (cell.sim_durations.size() > 1) {
            double var = 0.0;
            for (double d : cell.sim_durations) var += (d - cell.sim_mean) * (d - cell.sim_mean);
            var /= (cell.sim_durations.size() - 1);
            cell.sim_halfwidth = std::sqrt(var / cell.sim_durations.size());
        }
        if (cell.sim_mean > 0.0) {
            cell.relative_error = std::abs(cell.model_duration - cell.sim_mean) / cell.sim_mean;
        }
    };

    const int workers = std::max(1, grid.workers);
    if (workers == 1) {
        for (auto& cell : cells) run_cell(cell);
    } else {
        std::vector<std::thread> pool;
        std::size_t next = 0;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < cells.size(); i += workers) run_cell(cells[i]);
            });
        }
        (void)next;
        for (auto& t : pool) t.join();
    }
    return cells;
}

} // namespace scoot
