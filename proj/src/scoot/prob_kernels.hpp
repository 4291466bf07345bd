#pragma once

#include <stdexcept>

namespace scoot {

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoSupplyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Probability that the rider's nearest station holds at least one suitable
// vehicle, given n_total vehicles spread over grid_dim^2 stations of capacity
// `chargers`, of which n_suitable are suitable for this rider. Counts may be
// non-integer (log-gamma continuation); integer summation limits are
// interpolated in their fractional part so the kernel is continuous in Q.
double p_c1(double n_total, double n_suitable, int grid_dim, double chargers);

// Probability that no suitable randomly-located vehicle is closer than the
// nearest station. Production path: adaptive quadrature of the triangular
// nearest-station-distance mixture.
double p_c2(double n_random_suitable, int grid_dim, double region);

// Closed-form route for p_c2, valid for integer counts; alternating binomial
// sum, intended as a small-count cross-check only.
double p_c2_closed(int n_random_suitable, int grid_dim, double region);

// Probability that the station nearest to a drop-off has a vacant charger.
double p_q(double n_total, int grid_dim, double chargers);

// Probability that a promotion exceeds the walking disutility of returning the
// vehicle to the destination-nearest station. Piecewise quadratic in the
// promotion, continuous at half the cap.
double p_pi(double promotion, double value_of_time, double spacing, double speed_walk);

// Expected pickup distance conditional on the nearest station holding suitable
// vehicles: E[min(distance to station, distance to nearest suitable random
// vehicle)]. Production path: adaptive quadrature after reducing the double
// integral to a single one by integrating the tail distribution.
double expected_pickup_conditional(double n_random_suitable, int grid_dim, double region);

// Same quantity via genuinely nested 2-D adaptive quadrature (outer station
// distance, inner pickup distance). Slower; used as the quadrature authority
// in verification.
double expected_pickup_conditional_2d(double n_random_suitable, int grid_dim, double region);

// Closed-form route for the conditional pickup distance, integer counts.
double expected_pickup_conditional_closed(int n_random_suitable, int grid_dim, double region);

// Overall expected pickup distance: conditional part weighted by p_c1 plus the
// random-only law 0.63 * region / sqrt(n) on the complement.
double expected_pickup_distance(double n_random_suitable, int grid_dim, double spacing,
                                double region, double p_c1_value);

} // namespace scoot
