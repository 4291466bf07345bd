#include "doctest.h"

#include <vector>

#include "scoot/rectdist.hpp"
#include "scoot/rng.hpp"

using namespace scoot;

TEST_CASE("rectdist variants are bit-equivalent") {
    Rng rng(2025);
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t n = rng.uniform_index(97);
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = rng.uniform(0.0, 10.0);
            ys[i] = rng.uniform(0.0, 10.0);
        }
        // Inject exact duplicates to force distance ties.
        if (n > 8) {
            xs[n - 1] = xs[2];
            ys[n - 1] = ys[2];
            xs[n / 2] = xs[1];
            ys[n / 2] = ys[1];
        }
        const double px = rng.uniform(0.0, 10.0);
        const double py = rng.uniform(0.0, 10.0);

        const RectArgmin scalar = detail::rect_argmin_scalar(xs.data(), ys.data(), n, px, py);
        const RectArgmin active = rect_argmin(xs.data(), ys.data(), n, px, py);
        CHECK(scalar.index == active.index);
        CHECK(scalar.distance == active.distance);

        std::vector<double> d1(n), d2(n);
        detail::rect_distances_scalar(xs.data(), ys.data(), n, px, py, d1.data());
        rect_distances(xs.data(), ys.data(), n, px, py, d2.data());
        for (std::size_t i = 0; i < n; ++i) CHECK(d1[i] == d2[i]);
    }
}

TEST_CASE("rectdist exact-tie resolution picks the lowest index") {
    // Points arranged so indices 1, 5, 9 are all at distance 2.
    std::vector<double> xs = {9, 1, 9, 9, 9, 3, 9, 9, 9, 2};
    std::vector<double> ys = {9, 1, 9, 9, 9, 3, 9, 9, 9, 0};
    // query at (2, 2): d(1)= |1-2|+|1-2| = 2, d(5)=2, d(9)=2
    const RectArgmin r = rect_argmin(xs.data(), ys.data(), xs.size(), 2.0, 2.0);
    CHECK(r.index == 1);
    CHECK(r.distance == 2.0);

    rectdist_force_scalar(true);
    const RectArgmin s = rect_argmin(xs.data(), ys.data(), xs.size(), 2.0, 2.0);
    rectdist_force_scalar(false);
    CHECK(s.index == r.index);
    CHECK(s.distance == r.distance);
}

TEST_CASE("rectdist empty input") {
    const RectArgmin r = rect_argmin(nullptr, nullptr, 0, 1.0, 2.0);
    CHECK(r.index == -1);
}
