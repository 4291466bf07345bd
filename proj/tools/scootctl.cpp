// Command-line front end: steady-state reports, design optimization,
// simulation runs, model-vs-simulation verification, and parameter sweeps
// with CSV outputs and a re-runnable manifest.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "scoot/cost.hpp"
#include "scoot/csv.hpp"
#include "scoot/optimize.hpp"
#include "scoot/scenario.hpp"
#include "scoot/sim.hpp"
#include "scoot/solver.hpp"
#include "scoot/verify.hpp"

namespace fs = std::filesystem;
using namespace scoot;

namespace {

struct CommonArgs {
    std::string scenario_path;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    int workers = 1;
    std::string scheme = "";
};

Scenario load_scenario(const CommonArgs& args) {
    if (args.scenario_path.empty()) return Scenario::parse_text("", "<empty>");
    return Scenario::parse_file(args.scenario_path);
}

void ensure_out(const std::string& dir) { fs::create_directories(dir); }

void write_manifest(const std::string& out_dir, const std::string& command, Scenario manifest,
                    std::uint64_t seed, int workers) {
    manifest.set("command", command);
    manifest.set("seed", static_cast<double>(seed));
    manifest.set("workers", static_cast<double>(workers));
    manifest.write_file(out_dir + "/manifest.txt");
}

void print_state_report(const DesignVariables& design, const SteadyState& st,
                        const CostBreakdown& cost) {
    std::printf("steady state\n");
    std::printf("  conservation residual (inf norm): %.3e\n", st.residual_inf);
    std::printf("  mean trip duration: %.6g tu\n", st.mean_trip_duration);
    std::printf("  fleet size: %.6g vehicles\n", st.fleet);
    std::printf("  idle at stations: %.6g (capacity %.6g)\n", st.station_total(),
                static_cast<double>(design.grid_dim) * design.grid_dim * design.chargers);
    std::printf("  idle at random locations: %.6g (+ %.6g depleted)\n", st.random_total(),
                st.n_random[0]);
    std::printf("  trucks per headway: %.6g, route length: %.6g du\n", st.trucks_per_headway,
                st.route_length);
    std::printf("  cost per rider: %.6g $\n", cost.per_rider);
    std::printf("    stations %.6g, chargers %.6g, fleet %.6g, trucks %.6g, promotions %.6g, rider time %.6g [$/tu]\n",
                cost.station_cost, cost.charger_cost, cost.fleet_cost, cost.repositioning_cost,
                cost.promotion_cost, cost.rider_time_cost);
}

CsvTable design_table_header() {
    return CsvTable({"sweep_param", "sweep_value", "scheme", "n_random_total", "n_station_total",
                     "pi0", "pi1", "pi2", "pi3", "K", "Q", "H", "R", "S", "truck_cost_per_trip",
                     "promo_cost_per_trip", "random_density", "station_occupancy", "Z",
                     "agency_per_rider", "mean_trip_duration"});
}

void add_design_row(CsvTable& table, const std::string& param, double value,
                    const std::string& scheme, const SystemParams& params,
                    const OptimizeResult& res) {
    const auto& d = res.design;
    const auto& c = res.cost;
    const double k2q = static_cast<double>(d.grid_dim) * d.grid_dim * d.chargers;
    double random_total = 0.0;
    for (double v : d.n_random) random_total += v;
    auto cell = [](double v) { return CsvTable::cell(v); };
    table.add_row({param, cell(value), scheme, cell(random_total), cell(d.station_total()),
                   cell(d.promotions.size() > 0 ? d.promotions[0] : 0.0),
                   cell(d.promotions.size() > 1 ? d.promotions[1] : 0.0),
                   cell(d.promotions.size() > 2 ? d.promotions[2] : 0.0),
                   cell(d.promotions.size() > 3 ? d.promotions[3] : 0.0),
                   cell(static_cast<double>(d.grid_dim)), cell(d.chargers), cell(d.headway),
                   cell(d.truck_load), cell(d.station_spacing(params.region)),
                   cell(c.repositioning_cost / c.served_rate), cell(c.promotion_cost / c.served_rate),
                   cell(random_total / params.area()),
                   cell(k2q > 0.0 ? res.steady.station_total() / k2q : 0.0), cell(c.per_rider),
                   cell(c.agency_per_rider()), cell(c.mean_trip_duration)});
}

void add_benchmark_row(CsvTable& table, const std::string& param, double value,
                       const std::string& tag, const CostBreakdown& c) {
    auto cell = [](double v) { return CsvTable::cell(v); };
    table.add_row({param, cell(value), tag, "0", "0", "0", "0", "0", "0", "0", "0", "0", "0", "0",
                   cell(c.repositioning_cost / (c.served_rate > 0.0 ? c.served_rate : 1.0)), "0",
                   "0", "0", cell(c.per_rider), cell(c.agency_per_rider()),
                   cell(c.mean_trip_duration)});
}

int cmd_solve(const CommonArgs& args) {
    const Scenario sc = load_scenario(args);
    const SystemParams params = params_from_scenario(sc);
    DesignVariables design = design_from_scenario(sc, params);
    for (const auto& v : validate(params, design, bounds_from_scenario(sc))) {
        std::fprintf(stderr, "constraint violation [%s]: %s (amount %.6g)\n", v.id.c_str(),
                     v.message.c_str(), v.amount);
    }
    SteadyState st;
    if (sc.has("n_station_total")) {
        st = solve_steady_state(params, design, FixTotal::Station, sc.number("n_station_total"));
    } else {
        st = solve_steady_state(params, design, FixTotal::Random,
                                sc.number_or("n_random_total", 1000.0));
    }
    DesignVariables solved = design;
    solved.n_station = st.n_station;
    solved.n_random.assign(st.n_random.begin() + 1, st.n_random.end());
    const CostBreakdown cost = cost_breakdown(params, st, solved);
    print_state_report(solved, st, cost);

    if (!args.out_dir.empty()) {
        ensure_out(args.out_dir);
        CsvTable table({"soc", "station", "random", "booked", "inuse"});
        for (int b = 0; b <= params.battery_levels; ++b) {
            table.add_row({CsvTable::cell(b), CsvTable::cell_full(st.n_station[b]),
                           CsvTable::cell_full(st.n_random[b]), CsvTable::cell_full(st.n_booked[b]),
                           CsvTable::cell_full(st.n_inuse[b])});
        }
        table.write(args.out_dir + "/state.csv");
        Scenario manifest = sc;
        scenario_set_params(manifest, params);
        scenario_set_design(manifest, solved);
        write_manifest(args.out_dir, "solve", manifest, args.seed, args.workers);
    }
    return 0;
}

PriorityScheme scheme_or(const CommonArgs& args, const Scenario& sc) {
    if (!args.scheme.empty()) return priority_scheme_from_string(args.scheme);
    return priority_scheme_from_string(sc.word_or("scheme", "pw1"));
}

int cmd_optimize(const CommonArgs& args) {
    const Scenario sc = load_scenario(args);
    const SystemParams params = params_from_scenario(sc);
    OptimizeOptions opt;
    opt.bounds = bounds_from_scenario(sc);
    opt.seed = args.seed;
    opt.starts = static_cast<int>(sc.number_or("starts", opt.starts));
    if (sc.has("k_values")) {
        for (double k : sc.numbers("k_values")) opt.k_values.push_back(static_cast<int>(k));
    }
    const PriorityScheme scheme = scheme_or(args, sc);
    const OptimizeResult res = optimize_design(params, scheme, opt);
    std::printf("best design: K=%d Q=%.0f H=%.4g R=%.4g Z=%.6g\n", res.design.grid_dim,
                res.design.chargers, res.design.headway, res.design.truck_load,
                res.cost.per_rider);
    print_state_report(res.design, res.steady, res.cost);
    if (!args.out_dir.empty()) {
        ensure_out(args.out_dir);
        CsvTable table = design_table_header();
        add_design_row(table, "single", params.demand, to_string(scheme), params, res);
        table.write(args.out_dir + "/best_design.csv");
        CsvTable log({"K", "start", "best_cost", "evaluations"});
        for (const auto& row : res.log) {
            log.add_row({CsvTable::cell(row.grid_dim), CsvTable::cell(row.start),
                         CsvTable::cell_full(row.best_cost), CsvTable::cell(row.evaluations)});
        }
        log.write(args.out_dir + "/search_log.csv");
        Scenario manifest = sc;
        scenario_set_params(manifest, params);
        scenario_set_design(manifest, res.design);
        manifest.set("scheme", to_string(scheme));
        write_manifest(args.out_dir, "optimize", manifest, args.seed, args.workers);
    }
    return 0;
}

int cmd_simulate(const CommonArgs& args) {
    const Scenario sc = load_scenario(args);
    SimConfig cfg;
    cfg.params = params_from_scenario(sc);
    cfg.design = design_from_scenario(sc, cfg.params);
    cfg.horizon = sc.number_or("horizon", cfg.horizon);
    cfg.warmup = sc.number_or("warmup", cfg.warmup);
    cfg.cooldown = sc.number_or("cooldown", cfg.cooldown);
    cfg.seed = args.seed;
    const std::string field = sc.word_or("field_model", "uniformized");
    if (field == "persistent") {
        cfg.field_model = FieldModel::Persistent;
    } else if (field != "uniformized") {
        throw ScenarioError("field_model must be 'uniformized' or 'persistent'");
    }
    if (sc.has("fleet")) {
        cfg.fleet = sc.number("fleet");
        cfg.initial_station_total = sc.number_or("initial_station_total", 0.0);
    } else {
        // Initialize from the model's steady state, as the verification
        // protocol does.
        const SteadyState st = solve_steady_state(cfg.params, cfg.design, FixTotal::Random,
                                                  sc.number_or("n_random_total", 1000.0));
        cfg.fleet = std::round(st.fleet);
        cfg.initial_station_total = std::round(st.station_total());
    }
    const SimStats stats = run_simulation(cfg);
    std::printf("simulation: %lld requests, %lld served, lost fraction %.4g\n", stats.requests,
                stats.served, stats.lost_fraction);
    std::printf("  mean trip duration: %.6g tu (p90 %.6g)\n", stats.mean_trip_duration,
                stats.p90_trip_duration);
    std::printf("  mean wait: %.6g tu, truck distance: %.6g du\n", stats.mean_wait,
                stats.truck_distance);
    if (!args.out_dir.empty()) {
        ensure_out(args.out_dir);
        CsvTable table({"metric", "value"});
        table.add_row({"requests", CsvTable::cell(static_cast<double>(stats.requests))});
        table.add_row({"served", CsvTable::cell(static_cast<double>(stats.served))});
        table.add_row({"lost_fraction", CsvTable::cell_full(stats.lost_fraction)});
        table.add_row({"mean_trip_duration", CsvTable::cell_full(stats.mean_trip_duration)});
        table.add_row({"p90_trip_duration", CsvTable::cell_full(stats.p90_trip_duration)});
        table.add_row({"mean_wait", CsvTable::cell_full(stats.mean_wait)});
        table.add_row({"avg_booked", CsvTable::cell_full(stats.avg_booked)});
        table.add_row({"avg_inuse", CsvTable::cell_full(stats.avg_inuse)});
        table.add_row({"truck_distance", CsvTable::cell_full(stats.truck_distance)});
        table.add_row({"promotion_paid", CsvTable::cell_full(stats.promotion_paid)});
        table.add_row({"fleet", CsvTable::cell(static_cast<double>(stats.fleet_total))});
        table.write(args.out_dir + "/sim_stats.csv");
        CsvTable counts({"soc", "idle_random", "idle_station", "booked", "inuse", "on_truck",
                         "at_depot"});
        for (int b = 0; b <= cfg.params.battery_levels; ++b) {
            std::vector<std::string> row{CsvTable::cell(b)};
            for (int s = 0; s < kStatusCount; ++s) {
                row.push_back(CsvTable::cell_full(stats.avg_counts[b * kStatusCount + s]));
            }
            counts.add_row(row);
        }
        counts.write(args.out_dir + "/sim_counts.csv");
        Scenario manifest = sc;
        scenario_set_params(manifest, cfg.params);
        scenario_set_design(manifest, cfg.design);
        manifest.set("fleet", cfg.fleet);
        manifest.set("initial_station_total", cfg.initial_station_total);
        manifest.set("field_model", field);
        write_manifest(args.out_dir, "simulate", manifest, args.seed, args.workers);
    }
    return 0;
}

int cmd_verify(const CommonArgs& args) {
    const Scenario sc = load_scenario(args);
    const SystemParams params = params_from_scenario(sc);
    VerifyGrid grid;
    grid.workers = args.workers;
    if (sc.has("verify_k")) {
        grid.grid_dims.clear();
        for (double k : sc.numbers("verify_k")) grid.grid_dims.push_back(static_cast<int>(k));
    }
    if (sc.has("verify_n")) grid.random_totals = sc.numbers("verify_n");
    if (sc.has("verify_seeds")) {
        grid.seeds.clear();
        for (double s : sc.numbers("verify_seeds")) {
            grid.seeds.push_back(static_cast<std::uint64_t>(s));
        }
    } else {
        grid.seeds = {args.seed, args.seed + 1, args.seed + 2};
    }
    grid.horizon = sc.number_or("horizon", grid.horizon);
    grid.warmup = sc.number_or("warmup", grid.warmup);
    grid.cooldown = sc.number_or("cooldown", grid.cooldown);
    const auto cells = verify_model(params, grid);
    ensure_out(args.out_dir);
    CsvTable table({"K", "n_random_total", "model_converged", "model_duration", "model_fleet",
                    "model_station_total", "branches", "branch_low", "branch_high", "sim_mean",
                    "sim_halfwidth", "relative_error", "lost_fraction_mean"});
    for (const auto& c : cells) {
        double lost = 0.0;
        for (double l : c.sim_lost) lost += l;
        if (!c.sim_lost.empty()) lost /= c.sim_lost.size();
        table.add_row({CsvTable::cell(c.grid_dim), CsvTable::cell(c.random_total),
                       c.model_converged ? "1" : "0", CsvTable::cell_full(c.model_duration),
                       CsvTable::cell_full(c.model_fleet), CsvTable::cell_full(c.model_station_total),
                       CsvTable::cell(c.branches), CsvTable::cell_full(c.branch_low),
                       CsvTable::cell_full(c.branch_high), CsvTable::cell_full(c.sim_mean),
                       CsvTable::cell_full(c.sim_halfwidth), CsvTable::cell_full(c.relative_error),
                       CsvTable::cell_full(lost)});
        std::printf("K=%2d N=%6.0f model=%.4f sim=%.4f +- %.4f relerr=%.3f%% branches=%d\n",
                    c.grid_dim, c.random_total, c.model_duration, c.sim_mean, c.sim_halfwidth,
                    100.0 * c.relative_error, c.branches);
    }
    table.write(args.out_dir + "/verify.csv");
    Scenario manifest = sc;
    scenario_set_params(manifest, params);
    write_manifest(args.out_dir, "verify", manifest, args.seed, args.workers);
    return 0;
}

int cmd_sweep(const CommonArgs& args) {
    const Scenario sc = load_scenario(args);
    SystemParams base = params_from_scenario(sc);
    const std::string param = sc.word_or("sweep_param", "lambda");
    const std::vector<double> values = sc.numbers_or("sweep_values", {base.demand});
    std::vector<std::string> schemes = sc.words_or("schemes", {"pw1", "pw2", "pw3"});
    std::vector<std::string> benchmarks = sc.words_or("benchmarks", {"depot", "walk"});
    OptimizeOptions opt;
    opt.bounds = bounds_from_scenario(sc);
    opt.seed = args.seed;
    opt.starts = static_cast<int>(sc.number_or("starts", opt.starts));
    if (sc.has("k_values")) {
        for (double k : sc.numbers("k_values")) opt.k_values.push_back(static_cast<int>(k));
    }

    auto apply = [&](double v) {
        SystemParams p = base;
        if (param == "lambda") p.demand = v;
        else if (param == "beta") p.value_of_time = v;
        else if (param == "gamma") p.cost_scooter = v;
        else if (param == "omega1") p.cost_station = v;
        else if (param == "kappa") p.cost_truck_km = v;
        else if (param == "B") {
            p.battery_levels = static_cast<int>(v);
            // total charge time tracks capacity: one tu per level
            p.charging = p.charging.kind == ChargingKind::Linear
                             ? ChargingProfile::linear(p.battery_levels, v)
                             : ChargingProfile::piecewise(p.battery_levels, v);
        } else {
            throw ScenarioError("unknown sweep_param '" + param + "'");
        }
        return p;
    };

    struct Job {
        double value;
        std::string scheme; // pw tag or benchmark tag
    };
    std::vector<Job> jobs;
    for (double v : values) {
        for (const auto& s : schemes) jobs.push_back({v, s});
        for (const auto& b : benchmarks) jobs.push_back({v, b});
    }

    struct Outcome {
        bool ok = false;
        std::string error;
        CostBreakdown cost;
        OptimizeResult res;
    };
    std::vector<Outcome> outcomes(jobs.size());

    auto run_job = [&](std::size_t i) {
        const Job& job = jobs[i];
        Outcome& out = outcomes[i];
        try {
            const SystemParams p = apply(job.value);
            if (job.scheme == "walk") {
                out.cost = benchmark_walk_only(p);
            } else if (job.scheme == "depot") {
                out.res = benchmark_depot_only(p, opt);
                out.cost = out.res.cost;
            } else {
                out.res = optimize_design(p, priority_scheme_from_string(job.scheme), opt);
                out.cost = out.res.cost;
            }
            out.ok = true;
        } catch (const std::exception& e) {
            out.error = e.what();
        }
    };

    const int workers = std::max(1, args.workers);
    if (workers == 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < jobs.size(); i += workers) run_job(i);
            });
        }
        for (auto& t : pool) t.join();
    }

    ensure_out(args.out_dir);
    CsvTable table = design_table_header();
    CsvTable failures({"sweep_value", "scheme", "error"});
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const Job& job = jobs[i];
        const Outcome& out = outcomes[i];
        if (!out.ok) {
            failures.add_row({CsvTable::cell(job.value), job.scheme, out.error});
            continue;
        }
        if (job.scheme == "walk" || job.scheme == "depot") {
            add_benchmark_row(table, param, job.value, job.scheme, out.cost);
        } else {
            add_design_row(table, param, job.value, job.scheme, apply(job.value), out.res);
        }
        std::printf("%s=%.6g %s -> Z=%.6g\n", param.c_str(), job.value, job.scheme.c_str(),
                    out.cost.per_rider);
    }
    table.write(args.out_dir + "/sweep.csv");
    failures.write(args.out_dir + "/failures.csv");
    Scenario manifest = sc;
    scenario_set_params(manifest, base);
    manifest.set("sweep_param", param);
    manifest.set("sweep_values", values);
    manifest.set_words("schemes", schemes);
    manifest.set_words("benchmarks", benchmarks);
    write_manifest(args.out_dir, "sweep", manifest, args.seed, args.workers);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"planning toolkit for dockless shared e-scooter systems with charging stations"};
    app.require_subcommand(1);
    CommonArgs args;

    auto add_common = [&](CLI::App* cmd, bool need_seed) {
        cmd->add_option("--scenario", args.scenario_path, "scenario file (key = value lines)");
        cmd->add_option("--out", args.out_dir, "output directory")->capture_default_str();
        auto* seed = cmd->add_option("--seed", args.seed, "random seed");
        if (need_seed) seed->required();
        cmd->add_option("--workers", args.workers, "worker threads")
            ->envname("SCOOT_WORKERS")
            ->capture_default_str();
        cmd->add_option("--scheme", args.scheme, "priority scheme: pw1|pw2|pw3");
    };

    auto* solve = app.add_subcommand("solve", "solve the steady state of a fixed design");
    add_common(solve, false);
    auto* optimize = app.add_subcommand("optimize", "optimize the system design");
    add_common(optimize, true);
    auto* simulate = app.add_subcommand("simulate", "run the agent-based simulation");
    add_common(simulate, true);
    auto* verify = app.add_subcommand("verify", "compare model predictions with simulations");
    add_common(verify, false);
    auto* sweep = app.add_subcommand("sweep", "optimize across a parameter sweep");
    add_common(sweep, true);

    CLI11_PARSE(app, argc, argv);
    try {
        if (solve->parsed()) return cmd_solve(args);
        if (optimize->parsed()) return cmd_optimize(args);
        if (simulate->parsed()) return cmd_simulate(args);
        if (verify->parsed()) return cmd_verify(args);
        if (sweep->parsed()) return cmd_sweep(args);
    } catch (const ScenarioError& e) {
        std::fprintf(stderr, "scenario error: %s\n", e.what());
        return 2;
    } catch (const SolveError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
