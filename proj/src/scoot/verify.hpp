#pragma once

#include <cstdint>
#include <vector>

#include "scoot/sim.hpp"
#include "scoot/solver.hpp"

namespace scoot {

struct VerifyCell {
    int grid_dim = 0;
    double random_total = 0.0; // model input: idle vehicles at random locations
    bool model_converged = false;
    double model_duration = 0.0;
    double model_fleet = 0.0;
    double model_station_total = 0.0;
    int branches = 0; // distinct equilibria found at this fleet size
    double branch_low = 0.0;
    double branch_high = 0.0;
    std::vector<double> sim_durations; // one per seed
    std::vector<double> sim_lost;      // lost fraction per seed
    double sim_mean = 0.0;
    double sim_halfwidth = 0.0; // sample std over sqrt(seeds)
    double relative_error = 0.0;
};

struct VerifyGrid {
    std::vector<int> grid_dims{5, 10, 15, 20};
    std::vector<double> random_totals{10, 50, 100, 500, 1000, 2000, 5000};
    std::vector<std::uint64_t> seeds{1, 2, 3};
    double horizon = 2000.0;
    double warmup = 800.0;
    double cooldown = 200.0;
    bool tag_branches = true;
    int workers = 1;
};

// The fixed verification design: unit demand, headway 1, load 20, 20 chargers,
// promotions that give acceptance probabilities 1/2 and 1/4 for the two lowest
// post-trip SoC levels, uniform priority weights.
DesignVariables verification_design(const SystemParams& params, int grid_dim);

std::vector<VerifyCell> verify_model(const SystemParams& params, const VerifyGrid& grid);

} // namespace scoot
