#include "scoot/geometry.hpp"

#include <algorithm>

namespace scoot {

int trip_type_of_length(double l, int max_trip_levels) {
    if (!(l > 0.0) || l > static_cast<double>(max_trip_levels)) {
        throw std::invalid_argument("trip length outside (0, max_trip_levels]");
    }
    int t = static_cast<int>(std::ceil(l));
    return std::max(1, t);
}

double TripTypeProfile::total_rate() const {
    double s = 0.0;
    for (double r : rate) s += r;
    return s;
}

double TripTypeProfile::mean_trip_length() const {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < rate.size(); ++i) {
        num += rate[i] * mean_length[i];
        den += rate[i];
    }
    return den > 0.0 ? num / den : 0.0;
}

TripTypeProfile trip_type_profile(double lambda, int max_trip_levels) {
    if (!(lambda > 0.0) || max_trip_levels < 1) {
        throw std::invalid_argument("trip_type_profile: lambda > 0 and max_trip_levels >= 1 required");
    }
    TripTypeProfile p;
    p.rate.resize(max_trip_levels);
    p.mean_length.resize(max_trip_levels);
    const double l2 = static_cast<double>(max_trip_levels) * max_trip_levels;
    for (int t = 1; t <= max_trip_levels; ++t) {
        p.rate[t - 1] = lambda * (2.0 * t - 1.0) / l2;
        p.mean_length[t - 1] = (2.0 / 3.0) * (3.0 * t * t - 3.0 * t + 1.0) / (2.0 * t - 1.0);
    }
    return p;
}

StationGrid::StationGrid(int k, double region_side) : dim(k), region(region_side) {
    if (k < 0 || !(region_side > 0.0)) {
        throw std::invalid_argument("StationGrid: dim >= 0 and region > 0 required");
    }
    spacing = k > 0 ? region_side / k : 0.0;
}

Vec2 StationGrid::center(int index) const {
    const int row = index / dim;
    const int col = index % dim;
    return {(col + 0.5) * spacing, (row + 0.5) * spacing};
}

int StationGrid::cell_of(const Vec2& p) const {
    auto clamp_idx = [this](double v) {
        int i = static_cast<int>(std::floor(v / spacing));
        return std::clamp(i, 0, dim - 1);
    };
    return clamp_idx(p.y) * dim + clamp_idx(p.x);
}

std::pair<int, double> StationGrid::nearest(const Vec2& p) const {
    if (dim == 0) return {-1, 0.0};
    // The own-cell center minimizes rectilinear distance; check the 3x3
    // neighborhood anyway so boundary clamping and exact ties resolve to the
    // lowest index, matching a full arg-min scan.
    const int cell = cell_of(p);
    const int row = cell / dim;
    const int col = cell % dim;
    int best = -1;
    double best_d = 0.0;
    for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
            const int r = row + dr;
            const int c = col + dc;
            if (r < 0 || r >= dim || c < 0 || c >= dim) continue;
            const int idx = r * dim + c;
            const double d = rect_distance(p, center(idx));
            if (best < 0 || d < best_d - 1e-15 ||
                (std::abs(d - best_d) <= 1e-15 && idx < best)) {
                best = idx;
                best_d = d;
            }
        }
    }
    return {best, best_d};
}

SampledTrip sample_trip_wrapped(Rng& rng, double region_side, int max_trip_levels) {
    SampledTrip t;
    const double l_max = static_cast<double>(max_trip_levels);
    t.origin = {rng.uniform(0.0, region_side), rng.uniform(0.0, region_side)};
    double dx, dy;
    for (;;) {
        do {
            dx = rng.uniform(-l_max, l_max);
            dy = rng.uniform(-l_max, l_max);
        } while (std::abs(dx) + std::abs(dy) > l_max);
        if (std::abs(dx) + std::abs(dy) > 0.0) break;
    }
    auto wrap = [region_side](double v) {
        v = std::fmod(v, region_side);
        return v < 0.0 ? v + region_side : v;
    };
    t.destination = {wrap(t.origin.x + dx), wrap(t.origin.y + dy)};
    t.length = std::abs(dx) + std::abs(dy);
    t.type = trip_type_of_length(t.length, max_trip_levels);
    return t;
}

SampledTrip sample_trip(Rng& rng, double region_side, int max_trip_levels) {
    SampledTrip t;
    const double l_max = static_cast<double>(max_trip_levels);
    t.origin = {rng.uniform(0.0, region_side), rng.uniform(0.0, region_side)};
    for (;;) {
        // Uniform in the rectilinear ball by rejection from its bounding square.
        double dx, dy;
        do {
            dx = rng.uniform(-l_max, l_max);
            dy = rng.uniform(-l_max, l_max);
        } while (std::abs(dx) + std::abs(dy) > l_max);
        const Vec2 dest{t.origin.x + dx, t.origin.y + dy};
        if (dest.x < 0.0 || dest.x > region_side || dest.y < 0.0 || dest.y > region_side) continue;
        const double len = std::abs(dx) + std::abs(dy);
        if (len <= 0.0) continue; // zero-length trips carry no demand
        t.destination = dest;
        t.length = len;
        t.type = trip_type_of_length(len, max_trip_levels);
        return t;
    }
}

} // namespace scoot
