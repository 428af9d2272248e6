// Command-line front end: oracle tables, Monte Carlo reports, the validation
// suite and variance-bound reports for stationary Poisson hyperplane
// tessellations.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "phtess/config.hpp"
#include "phtess/oracle.hpp"
#include "phtess/report.hpp"
#include "phtess/simulate.hpp"
#include "phtess/validate.hpp"

namespace {

using namespace phtess;

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir; // overrides config when nonempty
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0; // 0: take from config
};

RunConfig load(const CommonArgs& args) {
    RunConfig cfg = parse_config(read_file(args.config_path));
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.seed_set && cfg.simulation) cfg.simulation->seed = args.seed;
    if (args.workers > 0 && cfg.simulation) cfg.simulation->workers = args.workers;
    return cfg;
}

BoundsReport closed_form_bounds(double gamma_hat, int d, int k) {
    BoundsReport rep;
    rep.k = k;
    rep.variance = isotropic_second_moment(gamma_hat, d, k, 0, 0) - pow_int(4.0, k);
    rep.lower = 0.0;
    rep.upper = vertex_variance_upper_bound(k);
    rep.within_bounds = variance_within_bounds(rep.variance, rep.upper);
    if (k == d) {
        rep.has_stability = true;
        rep.phi = stability_upper_constant(d); // exact isotropy attains the upper constant
        rep.phi_lower = stability_lower_constant(d);
        rep.phi_upper = stability_upper_constant(d);
    }
    return rep;
}

int cmd_oracle(const CommonArgs& args) {
    RunConfig cfg = load(args);
    std::filesystem::create_directories(cfg.out_dir);
    const bool closed_form = cfg.kind == DistributionKind::isotropic_closed_form;
    std::optional<DirectionalDistribution> dist;
    if (!closed_form) dist.emplace(make_distribution(cfg));
    for (int k : cfg.k_list) {
        MomentTable table = closed_form ? build_isotropic_moment_table(cfg.intensity, cfg.dimension, k)
                                        : build_moment_table(*dist, k, cfg.tolerances);
        std::string path = cfg.out_dir + "/moments_k" + std::to_string(k) + ".txt";
        write_file(path, moment_table_text(table));
        std::cerr << "wrote " << path << "\n";
        if (k >= 2) {
            BoundsReport rep = closed_form ? closed_form_bounds(cfg.intensity, cfg.dimension, k)
                                           : variance_bounds(*dist, k, cfg.tolerances);
            std::string bpath = cfg.out_dir + "/bounds_k" + std::to_string(k) + ".txt";
            write_file(bpath, bounds_text(rep));
            std::cerr << "wrote " << bpath << "\n";
        }
    }
    return 0;
}

int cmd_simulate(const CommonArgs& args, bool timing) {
    RunConfig cfg = load(args);
    if (!cfg.simulation) throw ConfigError("config: 'simulate' requires a simulation block");
    DirectionalDistribution dist = make_distribution(cfg);
    SimPlan plan;
    plan.replicates = cfg.simulation->replicates;
    plan.seed = cfg.simulation->seed;
    plan.workers = cfg.simulation->workers;
    plan.window.window_factor = cfg.simulation->window_factor;
    plan.window.retry_cap = cfg.simulation->retry_cap;
    for (int k : cfg.k_list) {
        plan.targets.push_back({SimTarget::Kind::vertex_mean, k, 0, 0});
        for (const auto& [r, s] : cfg.moments)
            if (r <= k && s <= k) plan.targets.push_back({SimTarget::Kind::second_moment, k, r, s});
    }
    auto t0 = std::chrono::steady_clock::now();
    std::vector<EstimateSummary> rows = run_experiment(dist, plan, cfg.tolerances);
    auto t1 = std::chrono::steady_clock::now();
    double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    std::filesystem::create_directories(cfg.out_dir);
    std::string path = cfg.out_dir + "/report.csv";
    write_file(path, csv_report(rows, timing ? fmt_g17(ms) : std::string()));
    std::cerr << "wrote " << path << " (" << rows.size() << " rows, " << fmt_g17(ms) << " ms)\n";
    return 0;
}

int cmd_validate(const CommonArgs& args, int realizations) {
    RunConfig cfg = load(args);
    DirectionalDistribution dist = make_distribution(cfg);
    std::uint64_t seed = cfg.simulation ? cfg.simulation->seed : 0;
    if (args.seed_set) seed = args.seed;
    auto results = run_validation_suite(dist, realizations, seed, cfg.tolerances);
    bool all_pass = true;
    for (const auto& c : results) {
        std::cout << format_check(c) << "\n";
        all_pass = all_pass && c.pass;
    }
    return all_pass ? 0 : 3;
}

int cmd_bounds(const CommonArgs& args) {
    RunConfig cfg = load(args);
    std::filesystem::create_directories(cfg.out_dir);
    const bool closed_form = cfg.kind == DistributionKind::isotropic_closed_form;
    std::optional<DirectionalDistribution> dist;
    if (!closed_form) dist.emplace(make_distribution(cfg));
    for (int k : cfg.k_list) {
        if (k < 2) continue;
        BoundsReport rep = closed_form ? closed_form_bounds(cfg.intensity, cfg.dimension, k)
                                       : variance_bounds(*dist, k, cfg.tolerances);
        std::string text = bounds_text(rep);
        std::cout << text;
        write_file(cfg.out_dir + "/bounds_k" + std::to_string(k) + ".txt", text);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"moments and Monte Carlo checks for Poisson hyperplane tessellations"};
    app.require_subcommand(1);

    CommonArgs args;
    bool timing = false;
    int realizations = 50;

    auto add_common = [&](CLI::App* sub, bool with_workers) {
        sub->add_option("--config", args.config_path, "run configuration (JSON)")->required();
        sub->add_option("--out", args.out_dir, "output directory (overrides config)");
        sub->add_option("--seed", args.seed, "master seed (overrides config)")
            ->each([&](const std::string&) { args.seed_set = true; });
        if (with_workers) sub->add_option("--workers", args.workers, "worker threads");
    };

    CLI::App* oracle = app.add_subcommand("oracle", "write closed-form moment tables and bounds");
    add_common(oracle, false);
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimates with oracle comparison");
    add_common(simulate, true);
    simulate->add_flag("--timing", timing, "fill the wall_time_ms column (breaks byte-stability)");
    CLI::App* validate = app.add_subcommand("validate", "run the invariant suite");
    add_common(validate, false);
    validate->add_option("--realizations", realizations, "realizations for the per-sample identity");
    CLI::App* bounds = app.add_subcommand("bounds", "variance bounds and stability report");
    add_common(bounds, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (oracle->parsed()) return cmd_oracle(args);
        if (simulate->parsed()) return cmd_simulate(args, timing);
        if (validate->parsed()) return cmd_validate(args, realizations);
        if (bounds->parsed()) return cmd_bounds(args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const SimulationDidNotConverge& e) {
        std::cerr << "simulation did not converge: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
