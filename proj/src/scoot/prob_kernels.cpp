#include "scoot/prob_kernels.hpp"

#include <algorithm>
#include <cmath>

#include "scoot/quadrature.hpp"

namespace scoot {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// log of the binomial coefficient with real-valued upper argument. Only called
// with q - 1 < n, where the gamma continuation is positive and vanishes
// smoothly as n decreases to q - 1.
double log_binom(double n, int q) {
    return std::lgamma(n + 1.0) - std::lgamma(static_cast<double>(q) + 1.0) -
           std::lgamma(n - q + 1.0);
}

// Sum over station occupancies q of
//   binom(n_choose, q) * cell_p^q * (1 - cell_p)^(n_exp - q)
// for q in [q_lo_real, q_hi_real]. Both limits are interpolated in their
// fractional part so the sum is continuous in real-valued counts and exact at
// integers. Terms with q >= n_choose + 1 vanish by the gamma continuation.
double occupancy_sum(double n_choose, double n_exp, double cell_p, double q_lo_real,
                     double q_hi_real) {
    if (q_hi_real < q_lo_real) return 0.0;
    const double log_p = std::log(cell_p);
    const double log_1p = std::log1p(-cell_p);
    const int q_first = static_cast<int>(std::ceil(q_lo_real));
    const int q_full = static_cast<int>(std::floor(q_hi_real));
    // Smoothstep weights keep the sum C1 in the real-valued limits while
    // reproducing the plain truncated sum at integers.
    auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
    const double frac_hi = smooth(q_hi_real - q_full);
    const double frac_lo = smooth(static_cast<double>(q_first) - q_lo_real);
    KahanSum acc;
    auto term = [&](int q) {
        if (q < 0 || static_cast<double>(q) >= n_choose + 1.0) return 0.0;
        const double lt = log_binom(n_choose, q) + q * log_p + (n_exp - q) * log_1p;
        return std::exp(lt);
    };
    for (int q = q_first; q <= q_full; ++q) acc.add(term(q));
    if (frac_hi > 0.0) acc.add(frac_hi * term(q_full + 1));
    if (frac_lo > 0.0 && q_first >= 1) acc.add(frac_lo * term(q_first - 1));
    return acc.value();
}

double lower_occupancy_limit(double n_total, int grid_dim, double chargers) {
    const double cells = static_cast<double>(grid_dim) * grid_dim;
    return std::max(0.0, n_total - (cells - 1.0) * chargers);
}

} // namespace

double p_c1(double n_total, double n_suitable, int grid_dim, double chargers) {
    if (grid_dim <= 0) return 0.0;
    if (n_total < 0.0 || n_suitable < 0.0 || n_suitable > n_total * (1.0 + 1e-12) + 1e-9) {
        throw std::invalid_argument("p_c1: need 0 <= n_suitable <= n_total");
    }
    const double cells = static_cast<double>(grid_dim) * grid_dim;
    if (n_total > cells * chargers * (1.0 + 1e-12) + 1e-9) {
        throw CapacityError("p_c1: station vehicles exceed total charger capacity");
    }
    if (n_total <= 0.0) return 0.0;
    const double n_unsuitable = std::max(0.0, n_total - n_suitable);
    const double q_min = lower_occupancy_limit(n_total, grid_dim, chargers);
    const double none_suitable = occupancy_sum(n_unsuitable, n_total, 1.0 / cells, q_min, chargers);
    return clamp01(1.0 - none_suitable);
}

double p_q(double n_total, int grid_dim, double chargers) {
    if (grid_dim <= 0) return 0.0;
    if (n_total < 0.0) throw std::invalid_argument("p_q: negative count");
    const double cells = static_cast<double>(grid_dim) * grid_dim;
    if (n_total > cells * chargers * (1.0 + 1e-12) + 1e-9) {
        throw CapacityError("p_q: station vehicles exceed total charger capacity");
    }
    const double q_min = lower_occupancy_limit(n_total, grid_dim, chargers);
    return clamp01(occupancy_sum(n_total, n_total, 1.0 / cells, q_min, chargers - 1.0));
}

namespace {

// Tail probability that a single uniformly-located vehicle is farther than l,
// clamped at zero where the rectilinear ball outgrows the region.
double farther_tail(double l, double region) {
    return std::max(0.0, 1.0 - 2.0 * l * l / (region * region));
}

} // namespace

double p_c2(double n_random_suitable, int grid_dim, double region) {
    if (grid_dim <= 0) return 0.0;
    if (n_random_suitable < 0.0) throw std::invalid_argument("p_c2: negative count");
    if (n_random_suitable == 0.0) return 1.0;
    const double s = region / grid_dim;
    const double n = n_random_suitable;
    auto rising = [&](double l) { return std::pow(farther_tail(l, region), n) * 4.0 * l / (s * s); };
    auto falling = [&](double l) {
        return std::pow(farther_tail(l, region), n) * 4.0 * (s - l) / (s * s);
    };
    const double v = adaptive_simpson(rising, 0.0, 0.5 * s) + adaptive_simpson(falling, 0.5 * s, s);
    return clamp01(v);
}

double p_c2_closed(int n_random_suitable, int grid_dim, double region) {
    (void)region;
    if (grid_dim <= 0) return 0.0;
    const int n = n_random_suitable;
    const double k2 = static_cast<double>(grid_dim) * grid_dim;
    const double first = (k2 / (n + 1.0)) *
                         (1.0 - 2.0 * std::pow(1.0 - 0.5 / k2, n + 1) + std::pow(1.0 - 2.0 / k2, n + 1));
    KahanSum tail;
    for (int i = 0; i <= n; ++i) {
        const double mag = std::exp(log_binom(static_cast<double>(n), i) +
                                    i * std::log(2.0 / k2)) *
                           (2.0 - std::pow(0.25, i)) / (i + 0.5);
        tail.add((i % 2 == 0) ? mag : -mag);
    }
    return first + tail.value();
}

double p_pi(double promotion, double value_of_time, double spacing, double speed_walk) {
    const double cap = value_of_time * spacing / speed_walk;
    if (promotion < -1e-12 || promotion > cap * (1.0 + 1e-9) + 1e-12) {
        throw std::invalid_argument("p_pi: promotion outside [0, cap]");
    }
    if (spacing <= 0.0) return 0.0;
    const double ratio = std::clamp(promotion / cap, 0.0, 1.0);
    if (ratio <= 0.5) return 2.0 * ratio * ratio;
    const double r = 1.0 - ratio;
    return 1.0 - 2.0 * r * r;
}

namespace {

// P(nearest-station distance > x) for the triangular law on [0, spacing].
double station_tail(double x, double spacing) {
    if (x <= 0.0) return 1.0;
    if (x >= spacing) return 0.0;
    if (x <= 0.5 * spacing) return 1.0 - 2.0 * (x / spacing) * (x / spacing);
    const double r = 1.0 - x / spacing;
    return 2.0 * r * r;
}

} // namespace

double expected_pickup_conditional(double n_random_suitable, int grid_dim, double region) {
    const double s = region / grid_dim;
    const double n = n_random_suitable;
    // E[min(l, nearest)] = integral of P(l > x) * P(nearest > x) dx, which
    // collapses the double integral over (station distance, pickup distance).
    auto integrand = [&](double x) {
        return std::pow(farther_tail(x, region), n) * station_tail(x, s);
    };
    return adaptive_simpson(integrand, 0.0, 0.5 * s) + adaptive_simpson(integrand, 0.5 * s, s);
}

double expected_pickup_conditional_2d(double n_random_suitable, int grid_dim, double region) {
    const double s = region / grid_dim;
    const double n = n_random_suitable;
    auto inner = [&](double l) {
        auto tail = [&](double x) { return std::pow(farther_tail(x, region), n); };
        return adaptive_simpson(tail, 0.0, l, 1e-13);
    };
    auto rising = [&](double l) { return inner(l) * 4.0 * l / (s * s); };
    auto falling = [&](double l) { return inner(l) * 4.0 * (s - l) / (s * s); };
    return adaptive_simpson(rising, 0.0, 0.5 * s, 1e-11) +
           adaptive_simpson(falling, 0.5 * s, s, 1e-11);
}

double expected_pickup_conditional_closed(int n_random_suitable, int grid_dim, double region) {
    const int n = n_random_suitable;
    const double s = region / grid_dim;
    const double k2 = static_cast<double>(grid_dim) * grid_dim;
    KahanSum acc;
    for (int i = 0; i <= n; ++i) {
        const double mag = std::exp(log_binom(static_cast<double>(n), i) - i * std::log(k2)) *
                           (std::pow(2.0, i + 2) - std::pow(2.0, -i)) /
                           ((2.0 * i + 1.0) * (2.0 * i + 2.0) * (2.0 * i + 3.0));
        acc.add(((i % 2 == 0) ? mag : -mag) * s);
    }
    return acc.value();
}

double expected_pickup_distance(double n_random_suitable, int grid_dim, double spacing,
                                double region, double p_c1_value) {
    (void)spacing;
    if (n_random_suitable <= 0.0) {
        if (p_c1_value <= 0.0) {
            throw NoSupplyError("expected_pickup_distance: no suitable supply anywhere");
        }
        throw NoSupplyError("expected_pickup_distance: needs positive random suitable supply");
    }
    const double random_only = 0.63 * region / std::sqrt(n_random_suitable);
    if (p_c1_value <= 0.0 || grid_dim <= 0) return random_only;
    const double conditional = expected_pickup_conditional(n_random_suitable, grid_dim, region);
    return p_c1_value * conditional + (1.0 - p_c1_value) * random_only;
}

} // namespace scoot
