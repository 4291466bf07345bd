#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "scoot/core.hpp"
#include "scoot/geometry.hpp"
#include "scoot/prob_kernels.hpp"

namespace scoot {

struct SolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All transition rates of the service cycle at a given idle deployment.
// Per-type arrays are indexed [soc][trip_type-1]; entries below the trip type
// are zero by construction.
struct FlowRates {
    int battery_levels = 0;
    int max_trip_levels = 0;

    std::vector<double> book_station;       // (B+1) x L, station bookings
    std::vector<double> book_random;        // (B+1) x L, random-location bookings
    std::vector<double> book_station_total; // B+1
    std::vector<double> book_random_total;  // B+1
    std::vector<double> pickup;             // B+1, equals the booking totals
    std::vector<double> drop_station;       // (B+1) x L, by pre-trip SoC and type
    std::vector<double> drop_random;        // (B+1) x L
    std::vector<double> charge;             // B, charge[b]: SoC b -> b+1 at stations
    double depot_charge = 0.0;              // depot charging completions
    double collect = 0.0;                   // depleted vehicles collected by trucks
    double distribute = 0.0;                // full vehicles distributed by trucks

    double& at(std::vector<double>& m, int soc, int type) {
        return m[static_cast<std::size_t>(soc) * max_trip_levels + (type - 1)];
    }
    double at(const std::vector<double>& m, int soc, int type) const {
        return m[static_cast<std::size_t>(soc) * max_trip_levels + (type - 1)];
    }
    // Drop-off inflow into SoC `soc` (station / random columns of the network).
    double station_drop_inflow(int soc) const;
    double random_drop_inflow(int soc) const;
    double total_bookings() const;
};

// Kernel values and rates evaluated at one idle deployment.
struct RateContext {
    FlowRates flow;
    TripTypeProfile profile;
    std::vector<double> cond_c1;         // per type: nearest station holds suitable
    std::vector<double> cond_c2;         // per type: no closer suitable random vehicle
    std::vector<double> station_prob;    // per type: both conditions (0 if no station mass)
    std::vector<double> pickup_distance; // per type: overall expected pickup distance
    double vacancy_prob = 0.0;           // destination station has a vacant charger
    std::vector<double> accept_prob;     // per post-trip SoC: promotion beats walking
    // Per-vehicle station booking intensity by SoC class, evaluated directly
    // from the booking split so it stays defined at zero class counts.
    std::vector<double> station_intensity;
};

// Memo for the quadrature-backed kernels, keyed by the suitable-count bit
// pattern. One instance per solve; safe to drop at any time.
class KernelCache {
public:
    double get_c2(double n, int grid_dim, double region);
    double get_pickup(double n, int grid_dim, double region);

private:
    std::vector<std::pair<std::uint64_t, double>> c2_, pickup_;
};

RateContext evaluate_rates(const SystemParams& params, const DesignVariables& design,
                           const std::vector<double>& n_station,
                           const std::vector<double>& n_random, KernelCache* cache = nullptr);

// Spec-facing wrapper: rates at the deployment stored in `design`.
FlowRates compute_rates(const SystemParams& params, const DesignVariables& design);

// The 2B+2 node-balance residuals, in documented order:
//   [0 .. B-2]   station balance at SoC 1..B-1
//   [B-1]        station balance at SoC 0
//   [B]          station balance at SoC B
//   [B+1 .. 2B-1] random-location balance at SoC 1..B-1
//   [2B]         depot inflow consistency (zero by construction of `collect`)
//   [2B+1]       depot loop closure (collect == distribute)
// Their sum telescopes to total bookings minus total drop-offs, which vanishes
// identically, so exactly one equation is redundant.
std::vector<double> conservation_residuals(const FlowRates& flow);

struct SteadyState {
    std::vector<double> n_station; // 0..B, charging/idle at stations
    std::vector<double> n_random;  // 0..B, idle at random locations (index 0 derived)
    std::vector<double> n_booked;  // 0..B, booked and awaiting pickup
    std::vector<double> n_inuse;   // 0..B, carrying a rider
    double n_truck_empty = 0.0;    // depleted, on trucks
    double n_truck_full = 0.0;     // full, on trucks
    double n_depot_charging = 0.0; // depleted, charging at the depot
    double n_depot_ready = 0.0;    // full, waiting at the depot
    FlowRates flow;
    double trucks_per_headway = 0.0;
    double route_length = 0.0; // truck distance per headway
    double fleet = 0.0;
    double mean_trip_duration = 0.0;
    std::vector<double> pickup_distance; // per trip type
    double residual_inf = 0.0;

    double station_total() const;
    double random_total() const; // SoC 1..B (the decision part)
};

// Little's-law closure of the non-idle states plus the truck plan.
SteadyState close_fleet(const SystemParams& params, const DesignVariables& design,
                        const FlowRates& flow);

enum class FixTotal { Random, Station, Fleet };

struct SolveOptions {
    double tol = 1e-10;          // infinity norm of the solver residual
    double accept_tol = 1e-9;    // fallback acceptance when progress stalls
    int max_iterations = 150;
    int max_starts = 8;
    bool trace = false;          // per-iteration diagnostics on stderr
    std::optional<std::vector<double>> warm_start; // packed unknown vector
};

// Finds the idle deployment whose transition flows balance at every node, with
// one total fixed (random idle, station idle, or whole fleet). Damped Newton
// with finite-difference Jacobian, multi-start from documented seeds; iterates
// projected to the nonnegative orthant and the station-capacity simplex.
SteadyState solve_steady_state(const SystemParams& params, const DesignVariables& design,
                               FixTotal mode, double target,
                               const SolveOptions& options = SolveOptions{});

struct EquilibriumBranch {
    bool good = false; // lower mean trip duration of the set
    SteadyState state;
};

// Multi-start root search at a fixed fleet size; clusters distinct roots and
// tags them by mean trip duration. Empty when nothing converges.
std::vector<EquilibriumBranch> find_equilibria(const SystemParams& params,
                                               const DesignVariables& design, double fleet_target,
                                               int n_starts = 12,
                                               const SolveOptions& options = SolveOptions{});

// Packed unknown vector of a state (for warm starts).
std::vector<double> pack_unknowns(const SteadyState& state, int grid_dim);

} // namespace scoot
