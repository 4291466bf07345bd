#pragma once

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "scoot/rng.hpp"

namespace scoot {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double rect_distance(const Vec2& a, const Vec2& b) {
    return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

// Number of battery levels a trip of length l consumes: the smallest integer >= l.
// Valid for 0 < l <= max_trip_levels.
int trip_type_of_length(double l, int max_trip_levels);

// Per-type demand decomposition of a uniform local-demand field:
// rate[t] = lambda * (2t - 1) / L^2, mean_length[t] = (2/3)(3t^2 - 3t + 1)/(2t - 1).
struct TripTypeProfile {
    std::vector<double> rate;        // index t-1, t = 1..max_trip_levels
    std::vector<double> mean_length; // same indexing

    int types() const { return static_cast<int>(rate.size()); }
    double total_rate() const;
    // Demand-weighted mean trip length.
    double mean_trip_length() const;
};

TripTypeProfile trip_type_profile(double lambda, int max_trip_levels);

// K x K grid of stations at the centers of the square cells partitioning the region.
struct StationGrid {
    int dim = 0;          // K
    double region = 0.0;  // side length
    double spacing = 0.0; // region / K

    StationGrid() = default;
    StationGrid(int k, double region_side);

    int count() const { return dim * dim; }
    Vec2 center(int index) const;
    int cell_of(const Vec2& p) const;

    // Arg-min of rectilinear distance over all stations; ties by lowest index.
    // For a cell-centered grid this is the cell containing the point.
    std::pair<int, double> nearest(const Vec2& p) const;
};

struct SampledTrip {
    Vec2 origin;
    Vec2 destination;
    double length = 0.0;
    int type = 0;
};

// Origin uniform in the square, destination uniform in the rectilinear ball of
// radius max_trip_levels around it, re-drawn while it falls outside the region.
SampledTrip sample_trip(Rng& rng, double region_side, int max_trip_levels);

// Periodic-boundary variant: the destination offset never gets re-drawn, so
// the type decomposition is exact everywhere; the stored destination wraps
// around the region. Trip length is the unwrapped rectilinear offset.
SampledTrip sample_trip_wrapped(Rng& rng, double region_side, int max_trip_levels);

} // namespace scoot
