#include "scoot/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <queue>

#include "scoot/geometry.hpp"
#include "scoot/rectdist.hpp"

namespace scoot {

namespace {

enum class EventKind : std::uint8_t {
    Request,
    Pickup,
    DropOff,
    StationCharge,
    DepotCharge,
    Dispatch,
    TruckVisit,
    TruckReturn,
};

struct Event {
    double t = 0.0;
    long long seq = 0;
    EventKind kind = EventKind::Request;
    int subject = -1; // vehicle id where applicable
    long long tag = 0; // charge epoch / payload
};

struct EventLater {
    bool operator()(const Event& a, const Event& b) const {
        if (a.t != b.t) return a.t > b.t;
        return a.seq > b.seq;
    }
};

struct Vehicle {
    Vec2 pos;
    int soc = 0;
    VehicleStatus status = VehicleStatus::IdleRandom;
    int station = -1;      // station index while IdleStation
    int cell = -1;         // spatial-index cell while IdleRandom
    int cell_slot = -1;    // position inside the cell bucket
    int class_slot = -1;   // position inside the per-SoC id list
    long long charge_epoch = 0;
    // active trip
    Vec2 dest;
    double trip_length = 0.0;
    int trip_type = 0;
    int promo_station = -1;
    double request_time = 0.0;
};

struct Station {
    Vec2 center;
    int present = 0;          // vehicles physically at the station
    int reserved_inbound = 0; // chargers promised to riders en route
    std::vector<std::vector<int>> avail; // bookable ids per SoC
};

// Uniform-cell spatial index over idle random vehicles.
struct SpatialIndex {
    int dim = 32;
    double cell_size = 0.0;
    double region = 0.0;
    std::vector<std::vector<int>> buckets;

    void init(double region_side, int cells_per_side) {
        dim = cells_per_side;
        region = region_side;
        cell_size = region_side / dim;
        buckets.assign(static_cast<std::size_t>(dim) * dim, {});
    }
    int cell_of(const Vec2& p) const {
        auto clamp_idx = [this](double v) {
            return std::clamp(static_cast<int>(v / cell_size), 0, dim - 1);
        };
        return clamp_idx(p.y) * dim + clamp_idx(p.x);
    }
};

struct Runner {
    const SimConfig& cfg;
    const SystemParams& params;
    const DesignVariables& design;
    int levels;
    int types;
    int chargers; // integral station capacity
    StationGrid grid;
    Vec2 depot;
    Rng rng;

    std::vector<Vehicle> fleet;
    std::vector<Station> stations;
    SpatialIndex index;
    std::vector<long long> random_by_soc;      // idle random vehicles per SoC
    std::vector<std::vector<int>> random_ids;  // idle random vehicle ids per SoC
    std::vector<std::vector<int>> station_ids; // bookable station vehicle ids per SoC
    std::vector<int> depot_ready;              // full vehicles waiting at the depot

    std::priority_queue<Event, std::vector<Event>, EventLater> queue;
    long long seq = 0;
    long long epoch = 0;

    // windowed statistics
    double w0, w1;
    SimStats stats;
    std::vector<double> durations;
    std::vector<double> waits;
    std::vector<double> pickup_sum;
    std::vector<long long> pickup_cnt;
    std::vector<int> counts;        // (B+1) x 6 occupancy
    std::vector<double> integrals;  // time integrals over the window
    std::vector<double> last_touch; // per-cell last update time
    // scratch buffers for candidate scans
    std::vector<double> scratch_x, scratch_y;
    std::vector<int> scratch_id;

    explicit Runner(const SimConfig& c)
        : cfg(c), params(c.params), design(c.design), levels(params.battery_levels),
          types(params.max_trip_levels),
          chargers(static_cast<int>(std::lround(design.chargers))),
          grid(design.grid_dim, params.region),
          depot{params.region / 2.0, params.region / 2.0 - params.depot_distance}, rng(c.seed),
          w0(c.warmup), w1(c.horizon - c.cooldown) {}

    bool in_window(double t) const { return t >= w0 && t < w1; }

    void push(double t, EventKind kind, int subject = -1, long long tag = 0) {
        queue.push(Event{t, seq++, kind, subject, tag});
    }

    int cell_index(int soc, VehicleStatus st) const {
        return soc * kStatusCount + static_cast<int>(st);
    }

    void touch(int soc, VehicleStatus st, double t, int delta) {
        const int c = cell_index(soc, st);
        const double lo = std::max(last_touch[c], w0);
        const double hi = std::min(t, w1);
        if (hi > lo) integrals[c] += counts[c] * (hi - lo);
        last_touch[c] = t;
        counts[c] += delta;
    }

    void move_state(Vehicle& v, double t, VehicleStatus to, int new_soc = -1) {
        touch(v.soc, v.status, t, -1);
        if (new_soc >= 0) v.soc = new_soc;
        v.status = to;
        touch(v.soc, v.status, t, +1);
    }

    // ---- spatial index maintenance -------------------------------------
    void index_insert(int id, double /*t*/) {
        Vehicle& v = fleet[id];
        v.cell = index.cell_of(v.pos);
        auto& bucket = index.buckets[v.cell];
        v.cell_slot = static_cast<int>(bucket.size());
        bucket.push_back(id);
        auto& ids = random_ids[v.soc];
        v.class_slot = static_cast<int>(ids.size());
        ids.push_back(id);
        ++random_by_soc[v.soc];
    }

    void index_remove(int id) {
        Vehicle& v = fleet[id];
        auto& bucket = index.buckets[v.cell];
        const int last = bucket.back();
        bucket[v.cell_slot] = last;
        fleet[last].cell_slot = v.cell_slot;
        bucket.pop_back();
        auto& ids = random_ids[v.soc];
        const int tail = ids.back();
        ids[v.class_slot] = tail;
        fleet[tail].class_slot = v.class_slot;
        ids.pop_back();
        --random_by_soc[v.soc];
        v.cell = -1;
        v.cell_slot = -1;
        v.class_slot = -1;
    }

    void station_avail_insert(int id) {
        Vehicle& v = fleet[id];
        auto& ids = station_ids[v.soc];
        v.class_slot = static_cast<int>(ids.size());
        ids.push_back(id);
    }

    void station_avail_remove(int id) {
        Vehicle& v = fleet[id];
        auto& ids = station_ids[v.soc];
        const int tail = ids.back();
        ids[v.class_slot] = tail;
        fleet[tail].class_slot = v.class_slot;
        ids.pop_back();
        v.class_slot = -1;
    }

    long long suitable_random_count(int type) const {
        long long n = 0;
        for (int b = type; b <= levels; ++b) n += random_by_soc[b];
        return n;
    }

    // Nearest idle random vehicle with soc >= type and distance strictly below
    // `bound` (bound = infinity when there is no station alternative).
    std::pair<int, double> nearest_random(const Vec2& p, int type, double bound) {
        const auto result = nearest_random_impl(p, type, bound);
        if (check_nearest) {
            int best = -1;
            double best_d = bound;
            for (std::size_t i = 0; i < fleet.size(); ++i) {
                const Vehicle& v = fleet[i];
                if (v.status != VehicleStatus::IdleRandom || v.cell < 0 || v.soc < type) continue;
                const double dd = rect_distance(v.pos, p);
                if (dd < best_d) {
                    best_d = dd;
                    best = static_cast<int>(i);
                }
            }
            if ((best < 0) != (result.first < 0) ||
                (best >= 0 && std::abs(best_d - result.second) > 1e-12)) {
                std::fprintf(stderr, "nearest_random mismatch: ring=(%d, %.6f) brute=(%d, %.6f)\n",
                             result.first, result.second, best, best_d);
                stats.invariants_ok = false;
            }
        }
        return result;
    }

    bool check_nearest = false;

    // Exchangeable-pool draw of the nearest station's stock: occupancy is a
    // binomial thinning of the global bookable pool capped at the charger
    // count, the occupants a uniform subset. Returns whether any occupant is
    // suitable for the trip type.
    bool station_suitable_uniformized(int type) {
        long long avail_total = 0;
        for (int b = 0; b <= levels; ++b) avail_total += static_cast<long long>(station_ids[b].size());
        if (avail_total == 0) return false;
        const double cells = static_cast<double>(grid.count());
        const double log1mp = std::log1p(-1.0 / cells);
        long long q = 0;
        double pos = 0.0;
        for (;;) {
            double u;
            do { u = rng.uniform(); } while (u <= 0.0);
            pos += std::floor(std::log(u) / log1mp) + 1.0;
            if (pos > static_cast<double>(avail_total)) break;
            if (++q >= chargers) break;
        }
        if (q == 0) return false;
        // sequential hypergeometric: does the q-subset hit a suitable class?
        long long suitable = 0;
        for (int b = type; b <= levels; ++b) {
            if (design.weights.at(type, b) > 0.0) suitable += station_ids[b].size();
        }
        for (long long j = 0; j < q; ++j) {
            const double p_hit = static_cast<double>(suitable) / (avail_total - j);
            if (rng.uniform() < p_hit) return true;
        }
        return false;
    }

    // Class choice per the priority rule on the global pool; vehicle uniform
    // within the class.
    int pick_station_vehicle_uniformized(int type) {
        double weight = 0.0;
        for (int b = type; b <= levels; ++b) {
            weight += design.weights.at(type, b) * station_ids[b].size();
        }
        if (!(weight > 0.0)) return -1;
        double u = rng.uniform() * weight;
        for (int b = type; b <= levels; ++b) {
            const double w = design.weights.at(type, b) * station_ids[b].size();
            if (w <= 0.0) continue;
            u -= w;
            if (u <= 0.0) {
                const auto& ids = station_ids[b];
                return ids[rng.uniform_index(ids.size())];
            }
        }
        for (int b = levels; b >= type; --b) {
            if (design.weights.at(type, b) > 0.0 && !station_ids[b].empty()) {
                return station_ids[b][station_ids[b].size() - 1];
            }
        }
        return -1;
    }

    // Uniform-field booking draw: nearest-suitable distance from the law
    // P(nearest > x) = (1 - 2x^2/Phi^2)^N, vehicle uniform among suitable ids.
    std::pair<int, double> sample_random_uniformized(int type, double bound) {
        const long long n = suitable_random_count(type);
        if (n == 0) return {-1, 0.0};
        double u;
        do { u = rng.uniform(); } while (u <= 0.0);
        const double x = params.region *
                         std::sqrt(-std::expm1(std::log(u) / static_cast<double>(n)) / 2.0);
        if (x >= bound) return {-2, x};
        std::uint64_t pick = rng.uniform_index(static_cast<std::uint64_t>(n));
        for (int b = type; b <= levels; ++b) {
            const auto& ids = random_ids[b];
            if (pick < ids.size()) return {ids[pick], x};
            pick -= ids.size();
        }
        return {-1, 0.0}; // unreachable when counts are consistent
    }

    // Point at rectilinear radius x from the origin, uniform over the
    // rectilinear circle, redrawn while it falls outside the region.
    Vec2 point_at_radius(const Vec2& origin, double x) {
        for (int attempt = 0; attempt < 64; ++attempt) {
            const double u = rng.uniform() * 4.0 * x;
            const int side = std::min(3, static_cast<int>(u / x));
            const double s = u - side * x; // in [0, x)
            double dx = 0.0, dy = 0.0;
            switch (side) {
                case 0: dx = s; dy = x - s; break;
                case 1: dx = x - s; dy = -s; break;
                case 2: dx = -s; dy = -(x - s); break;
                default: dx = -(x - s); dy = s; break;
            }
            const Vec2 q{origin.x + dx, origin.y + dy};
            if (q.x >= 0.0 && q.x <= params.region && q.y >= 0.0 && q.y <= params.region) return q;
        }
        return {std::clamp(origin.x, 0.0, params.region), std::clamp(origin.y, 0.0, params.region)};
    }

    std::pair<int, double> nearest_random_impl(const Vec2& p, int type, double bound) {
        if (suitable_random_count(type) == 0) return {-1, 0.0};
        const int cx = std::clamp(static_cast<int>(p.x / index.cell_size), 0, index.dim - 1);
        const int cy = std::clamp(static_cast<int>(p.y / index.cell_size), 0, index.dim - 1);
        int best = -1;
        double best_d = bound;
        for (int ring = 0; ring < 2 * index.dim; ++ring) {
            // Any point in a ring-r cell is at least (r-1) cell sizes away.
            if (index.cell_size * (ring - 1) >= best_d) break;
            bool any_cell = false;
            scratch_x.clear();
            scratch_y.clear();
            scratch_id.clear();
            const int y_lo = cy - ring, y_hi = cy + ring;
            for (int y = y_lo; y <= y_hi; ++y) {
                if (y < 0 || y >= index.dim) continue;
                const bool edge_row = (y == y_lo || y == y_hi);
                const int step = edge_row ? 1 : 2 * ring;
                for (int x = cx - ring; x <= cx + ring; x += std::max(step, 1)) {
                    if (x < 0 || x >= index.dim) continue;
                    any_cell = true;
                    for (int id : index.buckets[y * index.dim + x]) {
                        if (fleet[id].soc < type) continue;
                        scratch_x.push_back(fleet[id].pos.x);
                        scratch_y.push_back(fleet[id].pos.y);
                        scratch_id.push_back(id);
                    }
                }
            }
            if (!scratch_id.empty()) {
                const RectArgmin hit =
                    rect_argmin(scratch_x.data(), scratch_y.data(), scratch_id.size(), p.x, p.y);
                if (hit.index >= 0 && hit.distance < best_d) {
                    best_d = hit.distance;
                    best = scratch_id[hit.index];
                }
            }
            if (!any_cell && ring >= index.dim) break;
        }
        return {best, best == -1 ? 0.0 : best_d};
    }

    // ---- initialization --------------------------------------------------
    void initialize() {
        const long long total = static_cast<long long>(std::lround(cfg.fleet));
        fleet.assign(total, Vehicle{});
        random_by_soc.assign(levels + 1, 0);
        random_ids.assign(levels + 1, {});
        station_ids.assign(levels + 1, {});
        counts.assign(static_cast<std::size_t>(levels + 1) * kStatusCount, 0);
        integrals.assign(counts.size(), 0.0);
        last_touch.assign(counts.size(), 0.0);
        stats.bookings_by_type.assign(types + 1, 0);
        stats.drops_by_type.assign(types + 1, 0);
        pickup_sum.assign(types + 1, 0.0);
        pickup_cnt.assign(types + 1, 0);
        stats.fleet_total = total;

        const int cells = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(total))), 8, 64);
        index.init(params.region, cells);

        if (design.grid_dim > 0) {
            stations.resize(grid.count());
            for (int s = 0; s < grid.count(); ++s) {
                stations[s].center = grid.center(s);
                stations[s].avail.assign(levels + 1, {});
            }
        }

        long long at_station =
            std::min<long long>(static_cast<long long>(std::lround(cfg.initial_station_total)),
                                static_cast<long long>(grid.count()) * chargers);
        long long placed = 0;
        for (long long i = 0; i < total; ++i) {
            Vehicle& v = fleet[i];
            v.soc = levels;
            if (placed < at_station && design.grid_dim > 0) {
                int s;
                do {
                    s = static_cast<int>(rng.uniform_index(grid.count()));
                } while (stations[s].present >= chargers);
                v.status = VehicleStatus::IdleStation;
                v.station = s;
                v.pos = stations[s].center;
                stations[s].present++;
                stations[s].avail[v.soc].push_back(static_cast<int>(i));
                station_avail_insert(static_cast<int>(i));
                ++placed;
            } else {
                v.status = VehicleStatus::IdleRandom;
                v.pos = {rng.uniform(0.0, params.region), rng.uniform(0.0, params.region)};
                index_insert(static_cast<int>(i), 0.0);
            }
            counts[cell_index(v.soc, v.status)]++;
        }

        push(rng.exponential(params.trip_rate()), EventKind::Request);
        if (design.headway > 0.0) push(design.headway, EventKind::Dispatch);
    }

    // ---- request handling --------------------------------------------------
    double station_weight(int st_idx, int type) const {
        double w = 0.0;
        for (int b = type; b <= levels; ++b) {
            const double theta = design.weights.at(type, b);
            if (theta > 0.0 && !stations[st_idx].avail[b].empty()) {
                w += theta * stations[st_idx].avail[b].size();
            }
        }
        return w;
    }

    void handle_request(double t) {
        const bool measured = in_window(t);
        if (measured) ++stats.requests;
        const SampledTrip trip = cfg.field_model == FieldModel::Uniformized
                                     ? sample_trip_wrapped(rng, params.region, types)
                                     : sample_trip(rng, params.region, types);

        int station_idx = -1;
        double station_dist = std::numeric_limits<double>::infinity();
        double station_w = 0.0;
        if (design.grid_dim > 0) {
            const auto [idx, dist] = grid.nearest(trip.origin);
            if (cfg.field_model == FieldModel::Uniformized) {
                if (station_suitable_uniformized(trip.type)) {
                    station_idx = idx;
                    station_dist = dist;
                    if (measured) ++stats.station_suitable_events;
                }
            } else {
                station_w = station_weight(idx, trip.type);
                if (station_w > 0.0) {
                    station_idx = idx;
                    station_dist = dist;
                    if (measured) ++stats.station_suitable_events;
                }
            }
        }
        // Random candidates win only when strictly closer than the station.
        int random_id = -1;
        double random_dist = 0.0;
        if (cfg.field_model == FieldModel::Uniformized) {
            const auto hit = sample_random_uniformized(trip.type, station_dist);
            random_id = hit.first;
            random_dist = hit.second;
        } else {
            const auto hit = nearest_random(trip.origin, trip.type, station_dist);
            random_id = hit.first;
            random_dist = hit.second;
        }

        int chosen = -1;
        bool from_station = false;
        if (random_id >= 0) {
            chosen = random_id;
        } else if (station_idx >= 0 && cfg.field_model == FieldModel::Uniformized) {
            chosen = pick_station_vehicle_uniformized(trip.type);
            from_station = chosen >= 0;
            if (from_station) {
                Vehicle& sv = fleet[chosen];
                auto& pool = stations[sv.station].avail[sv.soc];
                for (std::size_t i = 0; i < pool.size(); ++i) {
                    if (pool[i] == chosen) {
                        pool[i] = pool.back();
                        pool.pop_back();
                        break;
                    }
                }
                station_avail_remove(chosen);
                // walk measured to the rider's nearest station; the host
                // station frees its spot (exchangeable pool)
                sv.pos = stations[station_idx].center;
            }
        } else if (station_idx >= 0) {
            // Sample the SoC class proportionally to weight * count.
            double u = rng.uniform() * station_w;
            int pick_soc = -1;
            for (int b = trip.type; b <= levels; ++b) {
                const double theta = design.weights.at(trip.type, b);
                if (theta <= 0.0) continue;
                u -= theta * stations[station_idx].avail[b].size();
                if (u <= 0.0) {
                    pick_soc = b;
                    break;
                }
            }
            if (pick_soc < 0) {
                for (int b = levels; b >= trip.type; --b) {
                    if (design.weights.at(trip.type, b) > 0.0 &&
                        !stations[station_idx].avail[b].empty()) {
                        pick_soc = b;
                        break;
                    }
                }
            }
            auto& pool = stations[station_idx].avail[pick_soc];
            chosen = pool.back();
            pool.pop_back();
            station_avail_remove(chosen);
            from_station = true;
        }
        (void)from_station;

        if (chosen < 0) {
            if (measured) ++stats.lost;
            push(t + rng.exponential(params.trip_rate()), EventKind::Request);
            return;
        }

        Vehicle& v = fleet[chosen];
        if (v.status == VehicleStatus::IdleRandom) {
            index_remove(chosen);
            if (cfg.field_model == FieldModel::Uniformized) {
                v.pos = point_at_radius(trip.origin, random_dist);
            }
        } else {
            v.charge_epoch = ++epoch; // interrupt charging, SoC stays put
            if (measured) ++stats.station_bookings;
        }
        move_state(v, t, VehicleStatus::Booked);
        v.dest = trip.destination;
        v.trip_length = trip.length;
        v.trip_type = trip.type;
        v.request_time = t;
        v.promo_station = -1;

        if (design.grid_dim > 0) {
            const int post = v.soc - trip.type;
            const double promo =
                post < static_cast<int>(design.promotions.size()) ? design.promotions[post] : 0.0;
            if (promo > 0.0) {
                const auto [dst_idx, dst_dist_unused] = grid.nearest(trip.destination);
                (void)dst_dist_unused;
                Station& dst = stations[dst_idx];
                if (dst.present + dst.reserved_inbound < chargers) {
                    const double walk_cost = params.value_of_time *
                                             rect_distance(dst.center, trip.destination) /
                                             params.speed_walk;
                    if (promo >= walk_cost - 1e-12) {
                        dst.reserved_inbound++;
                        v.promo_station = dst_idx;
                    }
                }
            }
        }

        if (measured) {
            ++stats.bookings_by_type[trip.type];
            pickup_sum[trip.type] += rect_distance(trip.origin, v.pos);
            ++pickup_cnt[trip.type];
        }
        const double walk = rect_distance(trip.origin, v.pos) / params.speed_walk;
        push(t + walk, EventKind::Pickup, chosen);
        push(t + rng.exponential(params.trip_rate()), EventKind::Request);
    }

    void handle_pickup(double t, int id) {
        Vehicle& v = fleet[id];
        if (v.status != VehicleStatus::Booked) return;
        if (v.station >= 0) {
            stations[v.station].present--;
            v.station = -1;
        }
        if (in_window(v.request_time)) waits.push_back(t - v.request_time);
        move_state(v, t, VehicleStatus::InUse);
        const Vec2 drop = v.promo_station >= 0 ? stations[v.promo_station].center : v.dest;
        // Uniformized: ride time follows the trip length, as the service-time
        // law does; Persistent: ride the true leg from the pickup position.
        const double ride = cfg.field_model == FieldModel::Uniformized
                                ? v.trip_length
                                : rect_distance(v.pos, drop);
        push(t + ride / params.speed_scooter, EventKind::DropOff, id);
        v.pos = drop;
    }

    void handle_dropoff(double t, int id) {
        Vehicle& v = fleet[id];
        const int post = v.soc - v.trip_type;
        if (in_window(v.request_time)) {
            ++stats.served;
            ++stats.drops_by_type[v.trip_type];
            durations.push_back(t - v.request_time);
        }
        if (v.promo_station >= 0) {
            Station& st = stations[v.promo_station];
            if (st.reserved_inbound <= 0) stats.invariants_ok = false;
            st.reserved_inbound--;
            st.present++;
            if (st.present + st.reserved_inbound > chargers) stats.invariants_ok = false;
            move_state(v, t, VehicleStatus::IdleStation, post);
            v.station = v.promo_station;
            st.avail[post].push_back(id);
            station_avail_insert(id);
            if (in_window(v.request_time)) {
                ++stats.station_dropoffs;
                stats.promotion_paid +=
                    post < static_cast<int>(design.promotions.size()) ? design.promotions[post] : 0.0;
            }
            if (post < levels) {
                v.charge_epoch = ++epoch;
                push(t + params.charging.tau[post], EventKind::StationCharge, id, v.charge_epoch);
            }
        } else {
            move_state(v, t, VehicleStatus::IdleRandom, post);
            index_insert(id, t);
        }
        v.promo_station = -1;
        v.trip_type = 0;
    }

    void handle_station_charge(double t, int id, long long tag) {
        Vehicle& v = fleet[id];
        if (v.status != VehicleStatus::IdleStation || v.charge_epoch != tag) return;
        Station& st = stations[v.station];
        auto& pool = st.avail[v.soc];
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (pool[i] == id) {
                pool[i] = pool.back();
                pool.pop_back();
                break;
            }
        }
        station_avail_remove(id);
        move_state(v, t, VehicleStatus::IdleStation, v.soc + 1);
        st.avail[v.soc].push_back(id);
        station_avail_insert(id);
        if (v.soc < levels) {
            v.charge_epoch = ++epoch;
            push(t + params.charging.tau[v.soc], EventKind::StationCharge, id, v.charge_epoch);
        }
    }

    // ---- trucks -------------------------------------------------------------
    void handle_dispatch(double t) {
        std::vector<int> waiting;
        for (std::size_t i = 0; i < fleet.size(); ++i) {
            // cell >= 0 excludes vehicles already reserved by an earlier dispatch
            if (fleet[i].status == VehicleStatus::IdleRandom && fleet[i].soc == 0 &&
                fleet[i].cell >= 0) {
                waiting.push_back(static_cast<int>(i));
            }
        }
        const int load = std::max(1, static_cast<int>(std::lround(design.truck_load)));
        const long long need = std::max<long long>(waiting.size(), depot_ready.size());
        const int trucks = static_cast<int>((need + load - 1) / load);
        if (trucks > 0) {
            std::vector<TruckStop> drops;
            drops.reserve(depot_ready.size());
            for (int id : depot_ready) {
                drops.push_back({{rng.uniform(0.0, params.region), rng.uniform(0.0, params.region)},
                                 true, id});
            }
            depot_ready.clear();
            std::vector<TruckStop> picks;
            picks.reserve(waiting.size());
            for (int id : waiting) {
                picks.push_back({fleet[id].pos, false, id});
                index_remove(id); // reserved by the truck; unbookable at SoC 0 anyway
            }
            const DispatchPlan plan =
                plan_dispatch(depot, drops, picks, trucks, load, rng, cfg.route_cfg);
            if (in_window(t)) stats.truck_distance += plan.total_length;
            for (const auto& route : plan.routes) {
                double at = t;
                Vec2 prev = depot;
                for (const auto& stop : route.stops) {
                    at += rect_distance(prev, stop.pos) / params.speed_truck;
                    prev = stop.pos;
                    push(at, EventKind::TruckVisit, stop.payload,
                         stop.is_dropoff ? 1 : 0);
                    if (stop.is_dropoff) {
                        Vehicle& v = fleet[stop.payload];
                        move_state(v, t, VehicleStatus::OnTruck);
                        v.pos = stop.pos;
                    }
                }
                const double back = at + rect_distance(prev, depot) / params.speed_truck;
                for (const auto& stop : route.stops) {
                    if (!stop.is_dropoff) push(back, EventKind::TruckReturn, stop.payload);
                }
            }
        }
        push(t + design.headway, EventKind::Dispatch);
    }

    void handle_truck_visit(double t, int id, bool dropoff) {
        Vehicle& v = fleet[id];
        if (dropoff) {
            move_state(v, t, VehicleStatus::IdleRandom);
            index_insert(id, t);
        } else {
            move_state(v, t, VehicleStatus::OnTruck);
        }
    }

    void handle_truck_return(double t, int id) {
        Vehicle& v = fleet[id];
        move_state(v, t, VehicleStatus::AtDepot);
        v.pos = depot;
        v.charge_epoch = ++epoch;
        push(t + params.charging.total(), EventKind::DepotCharge, id, v.charge_epoch);
    }

    void handle_depot_charge(double t, int id, long long tag) {
        Vehicle& v = fleet[id];
        if (v.status != VehicleStatus::AtDepot || v.charge_epoch != tag) return;
        move_state(v, t, VehicleStatus::AtDepot, levels);
        depot_ready.push_back(id);
    }

    // ---- main loop ----------------------------------------------------------
    SimStats run() {
        initialize();
        long long check_countdown = 4096;
        while (!queue.empty()) {
            const Event ev = queue.top();
            if (ev.t > cfg.horizon) break;
            queue.pop();
            switch (ev.kind) {
                case EventKind::Request: handle_request(ev.t); break;
                case EventKind::Pickup: handle_pickup(ev.t, ev.subject); break;
                case EventKind::DropOff: handle_dropoff(ev.t, ev.subject); break;
                case EventKind::StationCharge: handle_station_charge(ev.t, ev.subject, ev.tag); break;
                case EventKind::DepotCharge: handle_depot_charge(ev.t, ev.subject, ev.tag); break;
                case EventKind::Dispatch: handle_dispatch(ev.t); break;
                case EventKind::TruckVisit: handle_truck_visit(ev.t, ev.subject, ev.tag == 1); break;
                case EventKind::TruckReturn: handle_truck_return(ev.t, ev.subject); break;
            }
            if (--check_countdown == 0) {
                check_countdown = 4096;
                long long total = 0;
                for (int c : counts) total += c;
                if (total != stats.fleet_total) stats.invariants_ok = false;
            }
        }
        finalize();
        return stats;
    }

    void finalize() {
        for (std::size_t c = 0; c < counts.size(); ++c) {
            const double lo = std::max(last_touch[c], w0);
            if (w1 > lo) integrals[c] += counts[c] * (w1 - lo);
        }
        stats.window = w1 - w0;
        stats.avg_counts.assign(integrals.size(), 0.0);
        for (std::size_t c = 0; c < integrals.size(); ++c) {
            stats.avg_counts[c] = integrals[c] / stats.window;
        }
        for (int b = 0; b <= levels; ++b) {
            stats.avg_booked += stats.avg_count(b, VehicleStatus::Booked);
            stats.avg_inuse += stats.avg_count(b, VehicleStatus::InUse);
        }
        if (!durations.empty()) {
            double sum = 0.0;
            for (double d : durations) sum += d;
            stats.mean_trip_duration = sum / durations.size();
            std::vector<double> sorted = durations;
            std::sort(sorted.begin(), sorted.end());
            stats.p90_trip_duration = sorted[static_cast<std::size_t>(0.9 * (sorted.size() - 1))];
        }
        if (!waits.empty()) {
            double sum = 0.0;
            for (double w : waits) sum += w;
            stats.mean_wait = sum / waits.size();
        }
        stats.mean_pickup_by_type.assign(pickup_sum.size(), 0.0);
        for (std::size_t t = 1; t < pickup_sum.size(); ++t) {
            if (pickup_cnt[t] > 0) stats.mean_pickup_by_type[t] = pickup_sum[t] / pickup_cnt[t];
        }
        stats.booking_rate = stats.window > 0.0 ? stats.served / stats.window : 0.0;
        stats.lost_fraction =
            stats.requests > 0 ? static_cast<double>(stats.lost) / stats.requests : 0.0;
    }
};

} // namespace

SimStats run_simulation(const SimConfig& config) {
    if (!config.valid()) throw std::invalid_argument("run_simulation: invalid configuration");
    Runner runner(config);
    if (std::getenv("SCOOT_CHECK_NEAREST")) runner.check_nearest = true;
    return runner.run();
}

} // namespace scoot
