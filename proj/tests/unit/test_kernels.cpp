#include "doctest.h"

#include <cmath>
#include <vector>

#include "scoot/prob_kernels.hpp"
#include "scoot/rng.hpp"

using namespace scoot;

namespace {

// --- Monte-Carlo oracles, independent of the kernel implementations --------

// Samples the i.i.d. placement model behind the station-occupancy kernels:
// the tagged station's count via geometric gap skipping, suitability flags by
// sequential hypergeometric draws. Returns P(no suitable vehicle at the
// tagged station).
double mc_none_suitable(long long n_total, long long n_suitable, int grid_dim, long long trials,
                        Rng& rng) {
    const double p = 1.0 / (static_cast<double>(grid_dim) * grid_dim);
    const double log1mp = std::log1p(-p);
    long long none = 0;
    for (long long t = 0; t < trials; ++t) {
        long long q = 0;
        double pos = 0.0;
        for (;;) {
            double u;
            do { u = rng.uniform(); } while (u <= 0.0);
            pos += std::floor(std::log(u) / log1mp) + 1.0;
            if (pos > static_cast<double>(n_total)) break;
            ++q;
        }
        bool all_unsuitable = true;
        const long long n_unsuitable = n_total - n_suitable;
        for (long long j = 0; j < q; ++j) {
            const double p_unsuit = static_cast<double>(n_unsuitable - j) / (n_total - j);
            if (!(rng.uniform() < p_unsuit)) {
                all_unsuitable = false;
                break;
            }
        }
        if (all_unsuitable) ++none;
    }
    return static_cast<double>(none) / trials;
}

double mc_station_count_at_most(long long n_total, int grid_dim, long long limit, long long trials,
                                Rng& rng) {
    const double p = 1.0 / (static_cast<double>(grid_dim) * grid_dim);
    const double log1mp = std::log1p(-p);
    long long hits = 0;
    for (long long t = 0; t < trials; ++t) {
        long long q = 0;
        double pos = 0.0;
        for (;;) {
            double u;
            do { u = rng.uniform(); } while (u <= 0.0);
            pos += std::floor(std::log(u) / log1mp) + 1.0;
            if (pos > static_cast<double>(n_total)) break;
            ++q;
        }
        if (q <= limit) ++hits;
    }
    return static_cast<double>(hits) / trials;
}

// Mass the kernel's capacity-truncated sum discards: P(q > limit, all q at
// the tagged station unsuitable) under the i.i.d. placement model. Bounds the
// gap between the kernel and the untruncated oracle event.
double truncated_mass_above(long long n, long long n_suitable, int grid_dim, long long limit) {
    const double p = 1.0 / (static_cast<double>(grid_dim) * grid_dim);
    const long long n_unsuitable = n - n_suitable;
    double tail = 0.0;
    for (long long q = limit + 1; q <= n_unsuitable; ++q) {
        double lt = std::lgamma(n + 1.0) - std::lgamma(q + 1.0) - std::lgamma(n - q + 1.0) +
                    q * std::log(p) + (n - q) * std::log1p(-p);
        // hypergeometric probability that all q draws are unsuitable
        lt += std::lgamma(n_unsuitable + 1.0) - std::lgamma(n_unsuitable - q + 1.0) -
              (std::lgamma(n + 1.0) - std::lgamma(n - q + 1.0));
        const double term = std::exp(lt);
        tail += term;
        if (term < 1e-18 && q > limit + 4) break;
    }
    return tail;
}

double triangular_draw(Rng& rng, double s) { return 0.5 * s * (rng.uniform() + rng.uniform()); }

struct MeanStd {
    double mean = 0.0;
    double std_err = 0.0;
};

MeanStd mc_c2(double n, int grid_dim, double region, long long trials, Rng& rng) {
    const double s = region / grid_dim;
    double sum = 0.0, sum2 = 0.0;
    for (long long t = 0; t < trials; ++t) {
        const double l = triangular_draw(rng, s);
        const double v = std::pow(std::max(0.0, 1.0 - 2.0 * l * l / (region * region)), n);
        sum += v;
        sum2 += v * v;
    }
    MeanStd out;
    out.mean = sum / trials;
    const double var = std::max(0.0, sum2 / trials - out.mean * out.mean);
    out.std_err = std::sqrt(var / trials);
    return out;
}

// E[min(station distance, nearest of n random vehicles)]: draws the nearest
// random distance through the min of n uniforms mapped by the distance CDF.
MeanStd mc_pickup_conditional(int n, int grid_dim, double region, long long trials, Rng& rng) {
    const double s = region / grid_dim;
    double sum = 0.0, sum2 = 0.0;
    for (long long t = 0; t < trials; ++t) {
        const double l = triangular_draw(rng, s);
        double u_min = 1.0;
        for (int i = 0; i < n; ++i) u_min = std::min(u_min, rng.uniform());
        const double nearest = region * std::sqrt(u_min / 2.0);
        const double v = std::min(l, nearest);
        sum += v;
        sum2 += v * v;
    }
    MeanStd out;
    out.mean = sum / trials;
    const double var = std::max(0.0, sum2 / trials - out.mean * out.mean);
    out.std_err = std::sqrt(var / trials);
    return out;
}

} // namespace

TEST_CASE("station availability kernel: pinned cases") {
    CHECK(p_c1(0.0, 0.0, 10, 20.0) == 0.0);
    // All vehicles suitable: only the empty-station term survives.
    CHECK(p_c1(10.0, 10.0, 10, 20.0) ==
          doctest::Approx(1.0 - std::pow(0.99, 10)).epsilon(1e-12));
    CHECK_THROWS_AS(p_c1(201.0, 10.0, 10, 2.0), CapacityError);
    CHECK(p_c1(300.0, 120.0, 13, 6.0) > 0.0);
    CHECK(p_c1(300.0, 120.0, 13, 6.0) < 1.0);
}

TEST_CASE("vacancy kernel: pinned cases") {
    CHECK(p_q(0.0, 10, 20.0) == doctest::Approx(1.0));
    // Saturated: every station full, the summation range is empty.
    CHECK(p_q(100.0, 10, 1.0) == 0.0);
    const double v = p_q(2573.0, 20, 14.0);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
}

TEST_CASE("placement Monte-Carlo oracle: station availability") {
    Rng rng(555001);
    const long long trials = 1'000'000;
    struct Case { long long n_total, n_suitable; int k; double q; };
    // First case is the pinned one; the rest are randomized draws in the
    // regime where the capacity truncation is provably below the noise.
    std::vector<Case> cases = {{300, 120, 13, 6.0}};
    Rng gen(998);
    while (cases.size() < 6) {
        const int k = 8 + static_cast<int>(gen.uniform_index(13));
        const double q = 8.0 + static_cast<double>(gen.uniform_index(13));
        const double cap = static_cast<double>(k) * k * q;
        const long long n_total = 50 + static_cast<long long>(gen.uniform() * 0.45 * cap);
        const long long n_suitable = static_cast<long long>(gen.uniform() * n_total);
        cases.push_back({n_total, n_suitable, k, q});
    }
    for (const auto& c : cases) {
        CAPTURE(c.n_total);
        CAPTURE(c.k);
        const double kernel = p_c1(static_cast<double>(c.n_total), static_cast<double>(c.n_suitable),
                                   c.k, c.q);
        const double none = mc_none_suitable(c.n_total, c.n_suitable, c.k, trials, rng);
        const double mc = 1.0 - none;
        const double sigma = std::max({std::sqrt(mc * (1.0 - mc) / trials),
                                       std::sqrt(kernel * (1.0 - kernel) / trials), 1e-7});
        const double tail = truncated_mass_above(c.n_total, c.n_suitable, c.k,
                                                 static_cast<long long>(c.q));
        REQUIRE(tail < std::max(sigma, 1e-6));
        CHECK(std::abs(kernel - mc) <= 3.0 * sigma + tail);
    }
}

TEST_CASE("placement Monte-Carlo oracle: vacancy") {
    Rng rng(555002);
    const long long trials = 1'000'000;
    struct Case { long long n_total; int k; double q; };
    std::vector<Case> cases = {{2573, 20, 14.0}};
    Rng gen(999);
    while (cases.size() < 6) {
        const int k = 8 + static_cast<int>(gen.uniform_index(13));
        const double q = 8.0 + static_cast<double>(gen.uniform_index(13));
        const double cap = static_cast<double>(k) * k * q;
        const long long n_total = 50 + static_cast<long long>(gen.uniform() * 0.5 * cap);
        cases.push_back({n_total, k, q});
    }
    for (const auto& c : cases) {
        CAPTURE(c.n_total);
        CAPTURE(c.k);
        const double kernel = p_q(static_cast<double>(c.n_total), c.k, c.q);
        const double mc = mc_station_count_at_most(c.n_total, c.k,
                                                   static_cast<long long>(c.q) - 1, trials, rng);
        const double sigma = std::max({std::sqrt(mc * (1.0 - mc) / trials),
                                       std::sqrt(kernel * (1.0 - kernel) / trials), 1e-7});
        CHECK(std::abs(kernel - mc) <= 3.0 * sigma);
    }
}

TEST_CASE("closer-random kernel: pinned cases and Monte-Carlo oracle") {
    CHECK(p_c2(0.0, 10, 10.0) == doctest::Approx(1.0));
    CHECK(p_c2(10.0, 10000, 10.0) > 0.999);

    Rng rng(555003);
    const long long trials = 1'000'000;
    struct Case { double n; int k; };
    std::vector<Case> cases = {{100.0, 10}};
    Rng gen(1000);
    while (cases.size() < 6) {
        cases.push_back({1.0 + gen.uniform() * 400.0, 5 + static_cast<int>(gen.uniform_index(16))});
    }
    for (const auto& c : cases) {
        CAPTURE(c.n);
        CAPTURE(c.k);
        const double kernel = p_c2(c.n, c.k, 10.0);
        const MeanStd mc = mc_c2(c.n, c.k, 10.0, trials, rng);
        CHECK(std::abs(kernel - mc.mean) <= 3.0 * std::max(mc.std_err, 1e-7));
    }
}

TEST_CASE("promotion acceptance kernel") {
    const double beta = 20.0, s = 1.0, vw = 3.0;
    const double cap = beta * s / vw;
    CHECK(p_pi(cap / 2.0, beta, s, vw) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p_pi(std::sqrt(2.0) / 4.0 * cap, beta, s, vw) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(p_pi(cap, beta, s, vw) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p_pi(0.0, beta, s, vw) == 0.0);
    CHECK_THROWS(p_pi(cap + 0.01, beta, s, vw));
    CHECK_THROWS(p_pi(-0.01, beta, s, vw));
    // Continuity at the half-cap knee.
    CHECK(p_pi(cap / 2.0 - 1e-9, beta, s, vw) ==
          doctest::Approx(p_pi(cap / 2.0 + 1e-9, beta, s, vw)).epsilon(1e-6));
}

TEST_CASE("expected pickup distance: pinned cases and Monte-Carlo oracle") {
    // Without station coverage the random-fleet law applies exactly.
    CHECK(expected_pickup_distance(400.0, 10, 1.0, 10.0, 0.0) ==
          doctest::Approx(0.63 * 10.0 / 20.0).epsilon(1e-13));
    CHECK_THROWS_AS(expected_pickup_distance(0.0, 10, 1.0, 10.0, 0.0), NoSupplyError);

    Rng rng(555004);
    const long long trials = 1'000'000;
    struct Case { int n; int k; };
    std::vector<Case> cases = {{50, 10}};
    Rng gen(1001);
    while (cases.size() < 6) {
        cases.push_back({1 + static_cast<int>(gen.uniform_index(80)),
                         5 + static_cast<int>(gen.uniform_index(16))});
    }
    for (const auto& c : cases) {
        CAPTURE(c.n);
        CAPTURE(c.k);
        const double kernel = expected_pickup_conditional(static_cast<double>(c.n), c.k, 10.0);
        const MeanStd mc = mc_pickup_conditional(c.n, c.k, 10.0, trials, rng);
        CHECK(std::abs(kernel - mc.mean) <= 3.0 * std::max(mc.std_err, 1e-8));
    }
}

TEST_CASE("dual-path agreement: closed forms vs quadrature for small counts") {
    for (int k : {5, 10, 20}) {
        for (int n = 0; n <= 30; ++n) {
            const double quad = p_c2(static_cast<double>(n), k, 10.0);
            const double closed = p_c2_closed(n, k, 10.0);
            CHECK(std::abs(quad - closed) <= 1e-8 * std::max(1.0, std::abs(quad)));

            const double pickup_quad = expected_pickup_conditional_2d(static_cast<double>(n), k, 10.0);
            const double pickup_closed = expected_pickup_conditional_closed(n, k, 10.0);
            CHECK(std::abs(pickup_quad - pickup_closed) <=
                  1e-8 * std::max(1e-6, std::abs(pickup_quad)));

            // The reduced single integral is the same functional as the nested
            // double integral.
            const double pickup_fast = expected_pickup_conditional(static_cast<double>(n), k, 10.0);
            CHECK(pickup_fast == doctest::Approx(pickup_quad).epsilon(1e-9));
        }
    }
}

TEST_CASE("kernel ranges and monotonicity") {
    Rng gen(31337);
    for (int it = 0; it < 200; ++it) {
        const int k = 2 + static_cast<int>(gen.uniform_index(24));
        const double q = 1.0 + static_cast<double>(gen.uniform_index(30));
        const double cap = static_cast<double>(k) * k * q;
        const double n_total = gen.uniform() * 0.9 * cap;
        const double n_suit = gen.uniform() * n_total;
        const double v1 = p_c1(n_total, n_suit, k, q);
        CHECK(v1 >= 0.0);
        CHECK(v1 <= 1.0);
        // Nondecreasing in the suitable count at fixed total.
        const double bigger = std::min(n_total, n_suit + 0.35 * (n_total - n_suit));
        CHECK(p_c1(n_total, bigger, k, q) >= v1 - 1e-12);

        const double vq = p_q(n_total, k, q);
        CHECK(vq >= 0.0);
        CHECK(vq <= 1.0);
        CHECK(p_q(std::min(cap, n_total * 1.3 + 1.0), k, q) <= vq + 1e-12);

        const double nr = gen.uniform() * 500.0;
        const double vc2 = p_c2(nr, k, 10.0);
        CHECK(vc2 >= 0.0);
        CHECK(vc2 <= 1.0);
        CHECK(p_c2(nr + 10.0, k, 10.0) <= vc2 + 1e-12);

        const double pe = expected_pickup_distance(nr + 1.0, k, 10.0 / k, 10.0, gen.uniform());
        CHECK(pe >= 0.0);
        const double pe2 = expected_pickup_distance(nr + 30.0, k, 10.0 / k, 10.0, 0.0);
        const double pe1 = expected_pickup_distance(nr + 1.0, k, 10.0 / k, 10.0, 0.0);
        CHECK(pe2 <= pe1 + 1e-12);
    }
}
